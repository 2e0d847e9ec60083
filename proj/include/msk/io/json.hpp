#pragma once

#include "msk/core/model.hpp"
#include "msk/retarget/deform.hpp"
#include "msk/rom/edit.hpp"

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace msk {

using Json = nlohmann::json;

inline constexpr std::string_view kModelFormat = "msk-1";

// Path-tracking accessors: every error names the offending location, e.g.
// "model.bones[3].mass: expected a number".
namespace jsonpath {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) { throw Error(path + ": " + what); }

inline const Json& member(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key, "missing");
  return *it;
}

inline const Json* optional_member(const Json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "expected a finite number");
  return v;
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

inline std::string string(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

inline bool boolean(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

inline const Json& array(const Json& j, const std::string& path, std::optional<std::size_t> size = {}) {
  if (!j.is_array()) fail(path, "expected an array");
  if (size && j.size() != *size) fail(path, "expected " + std::to_string(*size) + " elements, got " + std::to_string(j.size()));
  return j;
}

inline std::string index(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline Vec3 vec3(const Json& j, const std::string& path) {
  array(j, path, 3);
  return {number(j[0], index(path, 0)), number(j[1], index(path, 1)), number(j[2], index(path, 2))};
}

/// [w, x, y, z], normalized on read; rejects non-unit input beyond 1e-6.
inline Quat quat(const Json& j, const std::string& path) {
  array(j, path, 4);
  Quat q(number(j[0], index(path, 0)), number(j[1], index(path, 1)), number(j[2], index(path, 2)),
         number(j[3], index(path, 3)));
  if (std::abs(q.norm() - 1.0) > 1e-6) fail(path, "expected a unit quaternion");
  return q;
}

inline double number_or(const Json& obj, const std::string& key, const std::string& path, double fallback) {
  const Json* v = optional_member(obj, key, path);
  return v ? number(*v, path + "." + key) : fallback;
}

inline std::string string_or(const Json& obj, const std::string& key, const std::string& path, std::string fallback) {
  const Json* v = optional_member(obj, key, path);
  return v ? string(*v, path + "." + key) : fallback;
}

inline void only_keys(const Json& obj, std::initializer_list<std::string_view> keys, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [k, v] : obj.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) fail(path + "." + k, "unknown key");
}

}  // namespace jsonpath

inline Json to_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
inline Json to_json(const Quat& q) { return Json::array({q.w(), q.x(), q.y(), q.z()}); }

inline Json to_json(const CurveSet& c) {
  return {{"active_width", c.active_width},
          {"passive_stiffness", c.passive_stiffness},
          {"passive_strain", c.passive_strain},
          {"tendon_strain", c.tendon_strain},
          {"tendon_toe_force", c.tendon_toe_force},
          {"tendon_toe_stiffness", c.tendon_toe_stiffness},
          {"tendon_toe_fraction", c.tendon_toe_fraction}};
}

inline CurveSet curves_from_json(const Json& j, const std::string& path) {
  using namespace jsonpath;
  only_keys(j,
            {"active_width", "passive_stiffness", "passive_strain", "tendon_strain", "tendon_toe_force",
             "tendon_toe_stiffness", "tendon_toe_fraction"},
            path);
  CurveSet c;
  c.active_width = number_or(j, "active_width", path, c.active_width);
  c.passive_stiffness = number_or(j, "passive_stiffness", path, c.passive_stiffness);
  c.passive_strain = number_or(j, "passive_strain", path, c.passive_strain);
  c.tendon_strain = number_or(j, "tendon_strain", path, c.tendon_strain);
  c.tendon_toe_force = number_or(j, "tendon_toe_force", path, c.tendon_toe_force);
  c.tendon_toe_stiffness = number_or(j, "tendon_toe_stiffness", path, c.tendon_toe_stiffness);
  c.tendon_toe_fraction = number_or(j, "tendon_toe_fraction", path, c.tendon_toe_fraction);
  return c;
}

inline Json to_json(const ShapeParams& s) {
  return {{"proximal_head_scale", s.proximal_head_scale},
          {"distal_head_scale", s.distal_head_scale},
          {"elongation", s.elongation},
          {"torsion_angle", s.torsion_angle},
          {"scale", s.scale}};
}

inline ShapeParams shape_from_json(const Json& j, const std::string& path) {
  using namespace jsonpath;
  only_keys(j, {"proximal_head_scale", "distal_head_scale", "elongation", "torsion_angle", "scale"}, path);
  ShapeParams s;
  s.proximal_head_scale = number_or(j, "proximal_head_scale", path, 1.0);
  s.distal_head_scale = number_or(j, "distal_head_scale", path, 1.0);
  s.elongation = number_or(j, "elongation", path, 1.0);
  s.torsion_angle = number_or(j, "torsion_angle", path, 0.0);
  s.scale = number_or(j, "scale", path, 1.0);
  return s;
}

inline Json to_json(const Bone& b) {
  Json inertia = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) inertia.push_back(b.inertia(r, c));
  return {{"id", b.id},
          {"joint", b.joint},
          {"parent", b.parent},
          {"joint_type", std::string(to_string(b.joint_type))},
          {"local_offset", to_json(b.local_offset)},
          {"rest_rotation", to_json(b.rest_rotation)},
          {"joint_axis", to_json(b.joint_axis)},
          {"shaft_axis", to_json(b.shaft_axis)},
          {"shaft_length", b.shaft_length},
          {"mass", b.mass},
          {"com", to_json(b.com)},
          {"inertia", inertia},
          {"shape", to_json(b.shape)}};
}

inline Bone bone_from_json(const Json& j, const std::string& path) {
  using namespace jsonpath;
  only_keys(j,
            {"id", "joint", "parent", "joint_type", "local_offset", "rest_rotation", "joint_axis", "shaft_axis",
             "shaft_length", "mass", "com", "inertia", "shape"},
            path);
  Bone b;
  b.id = string(member(j, "id", path), path + ".id");
  b.joint = string_or(j, "joint", path, b.id);
  b.parent = string_or(j, "parent", path, "");
  try {
    b.joint_type = joint_type_from_string(string(member(j, "joint_type", path), path + ".joint_type"));
  } catch (const Error& e) {
    fail(path + ".joint_type", e.what());
  }
  if (const Json* v = optional_member(j, "local_offset", path)) b.local_offset = vec3(*v, path + ".local_offset");
  if (const Json* v = optional_member(j, "rest_rotation", path)) b.rest_rotation = quat(*v, path + ".rest_rotation");
  if (const Json* v = optional_member(j, "joint_axis", path)) b.joint_axis = vec3(*v, path + ".joint_axis");
  if (const Json* v = optional_member(j, "shaft_axis", path)) b.shaft_axis = vec3(*v, path + ".shaft_axis");
  b.shaft_length = number_or(j, "shaft_length", path, 0.0);
  b.mass = number(member(j, "mass", path), path + ".mass");
  if (!(b.mass > 0.0)) fail(path + ".mass", "must be positive");
  if (const Json* v = optional_member(j, "com", path)) b.com = vec3(*v, path + ".com");
  if (const Json* v = optional_member(j, "inertia", path)) {
    const std::string ip = path + ".inertia";
    array(*v, ip, 9);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        b.inertia(r, c) = number((*v)[static_cast<std::size_t>(3 * r + c)], index(ip, static_cast<std::size_t>(3 * r + c)));
  }
  if (const Json* v = optional_member(j, "shape", path)) b.shape = shape_from_json(*v, path + ".shape");
  return b;
}

inline Json to_json(const MusculotendonUnit& m, const Skeleton& skel) {
  Json wps = Json::array();
  for (const auto& wp : m.waypoints) {
    Json skin = Json::array();
    for (const auto& s : wp.skin)
      skin.push_back({{"bone", skel.bone(s.bone).id}, {"weight", s.weight}, {"local", to_json(s.local)}});
    wps.push_back(std::move(skin));
  }
  return {{"id", m.id},       {"waypoints", wps}, {"l_m0", m.l_m0}, {"l_t0", m.l_t0}, {"pennation", m.pennation},
          {"f_max", m.f_max}, {"k_m", m.k_m},     {"k_t", m.k_t},   {"motions", m.motions}};
}

inline MusculotendonUnit muscle_from_json(const Json& j, const Skeleton& skel, const std::string& path) {
  using namespace jsonpath;
  only_keys(j, {"id", "waypoints", "l_m0", "l_t0", "pennation", "f_max", "k_m", "k_t", "motions"}, path);
  MusculotendonUnit m;
  m.id = string(member(j, "id", path), path + ".id");
  const std::string wp_path = path + ".waypoints";
  const Json& wps = array(member(j, "waypoints", path), wp_path);
  for (std::size_t k = 0; k < wps.size(); ++k) {
    const std::string kp = index(wp_path, k);
    Waypoint wp;
    const Json& skin = array(wps[k], kp);
    for (std::size_t e = 0; e < skin.size(); ++e) {
      const std::string ep = index(kp, e);
      only_keys(skin[e], {"bone", "weight", "local"}, ep);
      SkinEntry s;
      const std::string id = string(member(skin[e], "bone", ep), ep + ".bone");
      const auto bi = skel.find(id);
      if (!bi) fail(ep + ".bone", "unknown bone '" + id + "'");
      s.bone = *bi;
      s.weight = number(member(skin[e], "weight", ep), ep + ".weight");
      s.local = vec3(member(skin[e], "local", ep), ep + ".local");
      wp.skin.push_back(s);
    }
    m.waypoints.push_back(std::move(wp));
  }
  m.l_m0 = number(member(j, "l_m0", path), path + ".l_m0");
  m.l_t0 = number(member(j, "l_t0", path), path + ".l_t0");
  m.pennation = number_or(j, "pennation", path, 0.0);
  m.f_max = number(member(j, "f_max", path), path + ".f_max");
  m.k_m = number_or(j, "k_m", path, m.k_m);
  m.k_t = number_or(j, "k_t", path, m.k_t);
  if (const Json* v = optional_member(j, "motions", path)) {
    const std::string mp = path + ".motions";
    array(*v, mp);
    for (std::size_t i = 0; i < v->size(); ++i) m.motions.push_back(string((*v)[i], index(mp, i)));
  }
  try {
    validate_muscle(m, skel);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return m;
}

/// Joints keyed by bone id: a number for revolute joints, [w, x, y, z] for ball
/// joints. Missing joints take their rest value.
inline Json to_json(const Pose& p, const Skeleton& skel) {
  Json joints = Json::object();
  for (int i = 0; i < skel.size(); ++i) {
    const Bone& b = skel.bone(i);
    const auto& c = p.joints[static_cast<std::size_t>(i)];
    if (b.joint_type == JointType::revolute) joints[b.id] = c.angle;
    if (b.joint_type == JointType::ball_and_socket) joints[b.id] = to_json(c.rotation);
  }
  return {{"root_rotation", to_json(p.root_rotation)}, {"root_translation", to_json(p.root_translation)}, {"joints", joints}};
}

inline Pose pose_from_json(const Json& j, const Skeleton& skel, const std::string& path) {
  using namespace jsonpath;
  only_keys(j, {"root_rotation", "root_translation", "joints"}, path);
  Pose p = skel.rest_pose();
  if (const Json* v = optional_member(j, "root_rotation", path)) p.root_rotation = quat(*v, path + ".root_rotation");
  if (const Json* v = optional_member(j, "root_translation", path))
    p.root_translation = vec3(*v, path + ".root_translation");
  if (const Json* v = optional_member(j, "joints", path)) {
    const std::string jp = path + ".joints";
    if (!v->is_object()) fail(jp, "expected an object");
    for (const auto& [id, val] : v->items()) {
      const std::string vp = jp + "." + id;
      const auto bi = skel.find(id);
      if (!bi) fail(vp, "unknown bone");
      const Bone& b = skel.bone(*bi);
      auto& c = p.joints[static_cast<std::size_t>(*bi)];
      if (b.joint_type == JointType::revolute)
        c.angle = number(val, vp);
      else if (b.joint_type == JointType::ball_and_socket)
        c.rotation = quat(val, vp);
      else
        fail(vp, "the root is set through root_rotation/root_translation");
    }
  }
  return p;
}

inline Json to_json(const JointMotion& m) {
  return {{"id", m.id}, {"joint", m.joint}, {"axis", to_json(m.axis)}, {"lower", m.lower}, {"upper", m.upper}};
}

inline JointMotion motion_from_json(const Json& j, const std::string& path) {
  using namespace jsonpath;
  only_keys(j, {"id", "joint", "axis", "lower", "upper"}, path);
  JointMotion m;
  m.id = string(member(j, "id", path), path + ".id");
  m.joint = string(member(j, "joint", path), path + ".joint");
  if (const Json* v = optional_member(j, "axis", path)) m.axis = vec3(*v, path + ".axis");
  m.lower = number(member(j, "lower", path), path + ".lower");
  m.upper = number(member(j, "upper", path), path + ".upper");
  return m;
}

inline Json to_json(const Model& model) {
  Json bones = Json::array(), muscles = Json::array(), motions = Json::array(), keyposes = Json::array();
  for (const auto& b : model.skeleton.bones()) bones.push_back(to_json(b));
  for (const auto& m : model.muscles) muscles.push_back(to_json(m, model.skeleton));
  for (const auto& m : model.motions) motions.push_back(to_json(m));
  for (const auto& k : model.keyposes) keyposes.push_back({{"name", k.name}, {"pose", to_json(k.pose, model.skeleton)}});
  return {{"format", kModelFormat}, {"name", model.name},       {"gravity", to_json(model.gravity)},
          {"curves", to_json(model.curves)}, {"bones", bones}, {"muscles", muscles},
          {"motions", motions},     {"keyposes", keyposes}};
}

inline Model model_from_json(const Json& j, const std::string& path = "model") {
  using namespace jsonpath;
  only_keys(j, {"format", "name", "gravity", "curves", "bones", "muscles", "motions", "keyposes"}, path);
  const std::string format = string(member(j, "format", path), path + ".format");
  if (format != kModelFormat) fail(path + ".format", "unsupported format '" + format + "'");
  Model model;
  model.name = string_or(j, "name", path, model.name);
  if (const Json* v = optional_member(j, "gravity", path)) model.gravity = vec3(*v, path + ".gravity");
  if (const Json* v = optional_member(j, "curves", path)) model.curves = curves_from_json(*v, path + ".curves");
  const std::string bp = path + ".bones";
  const Json& bones_json = array(member(j, "bones", path), bp);
  std::vector<Bone> bones;
  for (std::size_t i = 0; i < bones_json.size(); ++i) bones.push_back(bone_from_json(bones_json[i], index(bp, i)));
  try {
    model.skeleton = Skeleton(std::move(bones));
  } catch (const Error& e) {
    fail(bp, e.what());
  }
  if (const Json* v = optional_member(j, "muscles", path)) {
    const std::string mp = path + ".muscles";
    array(*v, mp);
    for (std::size_t i = 0; i < v->size(); ++i)
      model.muscles.push_back(muscle_from_json((*v)[i], model.skeleton, index(mp, i) + "(" +
                                                                             (*v)[i].value("id", std::string("?")) + ")"));
  }
  if (const Json* v = optional_member(j, "motions", path)) {
    const std::string mp = path + ".motions";
    array(*v, mp);
    for (std::size_t i = 0; i < v->size(); ++i) model.motions.push_back(motion_from_json((*v)[i], index(mp, i)));
  }
  if (const Json* v = optional_member(j, "keyposes", path)) {
    const std::string kp = path + ".keyposes";
    array(*v, kp);
    for (std::size_t i = 0; i < v->size(); ++i) {
      const std::string ip = index(kp, i);
      only_keys((*v)[i], {"name", "pose"}, ip);
      model.keyposes.push_back({string(member((*v)[i], "name", ip), ip + ".name"),
                                pose_from_json(member((*v)[i], "pose", ip), model.skeleton, ip + ".pose")});
    }
  }
  try {
    validate_model(model);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return model;
}

/// Sorted keys, two-space indent, shortest round-trip numbers, trailing newline.
inline std::string canonical_dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json parse_json(std::string_view text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(what + ": " + e.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << text;
  if (!out) throw Error("write failed for '" + path + "'");
}

inline std::string model_to_text(const Model& m) { return canonical_dump(to_json(m)); }
inline Model model_from_text(std::string_view text, const std::string& what = "model") {
  return model_from_json(parse_json(text, what), "model");
}

inline void save_model(const Model& m, const std::string& path) { write_text_file(path, model_to_text(m)); }
inline Model load_model(const std::string& path) { return model_from_text(read_text_file(path), path); }

inline std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) throw Error("sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

/// Hash of the canonical serialized form.
inline std::string model_hash(const Model& m) { return sha256_hex(model_to_text(m)); }

// Skeleton parameters: torsion and bend in radians.
inline Json to_json(const BoneParams& b) {
  return {{"elongate", b.elongate},
          {"torsion", b.torsion},
          {"proximal_head_scale", b.proximal_head_scale},
          {"distal_head_scale", b.distal_head_scale},
          {"mass_scale", b.mass_scale}};
}

inline Json to_json(const SkeletonParams& p) {
  Json bones = Json::object();
  for (const auto& [id, b] : p.bones) bones[id] = to_json(b);
  return {{"bones", bones},
          {"trunk", {{"elongate", p.trunk.elongate}, {"expand", p.trunk.expand}, {"bend", p.trunk.bend}}},
          {"extremity_scale", p.extremity_scale},
          {"global_scale", p.global_scale},
          {"symmetric", p.symmetric}};
}

inline SkeletonParams params_from_json(const Json& j, const std::string& path = "params") {
  using namespace jsonpath;
  only_keys(j, {"bones", "trunk", "extremity_scale", "global_scale", "symmetric"}, path);
  SkeletonParams p;
  if (const Json* v = optional_member(j, "bones", path)) {
    if (!v->is_object()) fail(path + ".bones", "expected an object");
    for (const auto& [id, bj] : v->items()) {
      const std::string bp = path + ".bones." + id;
      only_keys(bj, {"elongate", "torsion", "proximal_head_scale", "distal_head_scale", "mass_scale"}, bp);
      BoneParams b;
      b.elongate = number_or(bj, "elongate", bp, 1.0);
      b.torsion = number_or(bj, "torsion", bp, 0.0);
      b.proximal_head_scale = number_or(bj, "proximal_head_scale", bp, 1.0);
      b.distal_head_scale = number_or(bj, "distal_head_scale", bp, 1.0);
      b.mass_scale = number_or(bj, "mass_scale", bp, 1.0);
      p.bones[id] = b;
    }
  }
  if (const Json* v = optional_member(j, "trunk", path)) {
    const std::string tp = path + ".trunk";
    only_keys(*v, {"elongate", "expand", "bend"}, tp);
    p.trunk.elongate = number_or(*v, "elongate", tp, 1.0);
    p.trunk.expand = number_or(*v, "expand", tp, 1.0);
    p.trunk.bend = number_or(*v, "bend", tp, 0.0);
  }
  p.extremity_scale = number_or(j, "extremity_scale", path, 1.0);
  p.global_scale = number_or(j, "global_scale", path, 1.0);
  if (const Json* v = optional_member(j, "symmetric", path)) p.symmetric = boolean(*v, path + ".symmetric");
  return p;
}

inline Json to_json(const JointEdit& e) {
  if (const auto* r = std::get_if<RevoluteEdit>(&e))
    return {{"type", "revolute"}, {"scale", r->scale}, {"shift", r->shift}, {"center", r->center}};
  const auto& b = std::get<BallEdit>(e);
  return {{"type", "ball"},
          {"twist_scale", b.twist_scale},
          {"twist_shift", b.twist_shift},
          {"twist_center", b.twist_center},
          {"cone_scale", b.cone_scale},
          {"cone_center", to_json(b.cone_center)},
          {"re_aim", to_json(b.re_aim)}};
}

inline Json to_json(const RomEdit& e) {
  Json joints = Json::object();
  for (const auto& [name, je] : e.joints) joints[name] = to_json(je);
  return {{"joints", joints}};
}

inline JointEdit joint_edit_from_json(const Json& j, const std::string& path) {
  using namespace jsonpath;
  const std::string type = string(member(j, "type", path), path + ".type");
  if (type == "revolute") {
    only_keys(j, {"type", "scale", "shift", "center"}, path);
    return RevoluteEdit{number_or(j, "scale", path, 1.0), number_or(j, "shift", path, 0.0),
                        number_or(j, "center", path, 0.0)};
  }
  if (type == "ball") {
    only_keys(j, {"type", "twist_scale", "twist_shift", "twist_center", "cone_scale", "cone_center", "re_aim"}, path);
    BallEdit b;
    b.twist_scale = number_or(j, "twist_scale", path, 1.0);
    b.twist_shift = number_or(j, "twist_shift", path, 0.0);
    b.twist_center = number_or(j, "twist_center", path, 0.0);
    b.cone_scale = number_or(j, "cone_scale", path, 1.0);
    if (const Json* v = optional_member(j, "cone_center", path)) b.cone_center = vec3(*v, path + ".cone_center");
    if (const Json* v = optional_member(j, "re_aim", path)) b.re_aim = quat(*v, path + ".re_aim");
    return b;
  }
  fail(path + ".type", "expected 'revolute' or 'ball'");
}

inline RomEdit rom_edit_from_json(const Json& j, const std::string& path = "edit") {
  using namespace jsonpath;
  only_keys(j, {"joints"}, path);
  RomEdit e;
  const Json& joints = member(j, "joints", path);
  if (!joints.is_object()) fail(path + ".joints", "expected an object");
  for (const auto& [name, v] : joints.items()) e.joints[name] = joint_edit_from_json(v, path + ".joints." + name);
  return e;
}

}  // namespace msk
