#pragma once

#include "msk/io/grid_io.hpp"
#include "msk/retarget/pipeline.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <functional>

namespace msk {

/// Cone edit given as a tilt of the reference cone plus a narrowing factor; the
/// concrete BallEdit needs the reference cone center.
struct ConeTilt {
  double tilt = 0.0;  // radians
  Vec3 axis = Vec3::UnitX();
  double shrink = 1.0;

  bool operator==(const ConeTilt& o) const { return tilt == o.tilt && axis == o.axis && shrink == o.shrink; }
};

using EditSpec = std::variant<JointEdit, ConeTilt>;

inline JointEdit resolve_edit_spec(const EditSpec& spec, const Vec3& reference_center) {
  if (const auto* e = std::get_if<JointEdit>(&spec)) return *e;
  const auto& t = std::get<ConeTilt>(spec);
  return tilt_and_shrink_edit(reference_center, t.axis, t.tilt, t.shrink);
}

/// Edit request body: a full joint edit ({"type": ...}) or a cone tilt
/// ({"tilt_deg" | "tilt", "tilt_axis", "cone_scale"}).
inline EditSpec edit_spec_from_json(const Json& j, const std::string& path = "edit") {
  using namespace jsonpath;
  if (!j.is_object()) fail(path, "expected an object");
  if (j.contains("type")) return joint_edit_from_json(j, path);
  only_keys(j, {"tilt", "tilt_deg", "tilt_axis", "cone_scale"}, path);
  ConeTilt t;
  if (j.contains("tilt") && j.contains("tilt_deg")) fail(path, "give either tilt or tilt_deg");
  t.tilt = j.contains("tilt_deg") ? deg2rad(number(j["tilt_deg"], path + ".tilt_deg")) : number_or(j, "tilt", path, 0.0);
  if (const Json* v = optional_member(j, "tilt_axis", path)) t.axis = vec3(*v, path + ".tilt_axis");
  if (!(t.axis.norm() > 0.0)) fail(path + ".tilt_axis", "must be non-zero");
  t.shrink = number(member(j, "cone_scale", path), path + ".cone_scale");
  if (!(t.shrink > 0.0)) fail(path + ".cone_scale", "must be positive");
  return t;
}

struct RunSettings {
  std::uint64_t seed = 7;
  std::size_t dataset_poses = 5000;  // synthetic dataset size when no dataset file is given
  bool mirror = false;               // mirror an ingested dataset
  double subsample = 1.0;
  int curve_samples = 41;
  double activation = 1.0;
};

struct RunConfig {
  SkeletonParams params;
  PipelineConfig pipeline;
  std::map<std::string, EditSpec> edits;  // keyed by joint name
  RunSettings run;
};

// TOML-like config text:
//   [skeleton]   global_scale, extremity_scale, symmetric
//   [bone.<id>]  elongate, torsion | torsion_deg, proximal_head_scale, distal_head_scale, mass_scale
//   [trunk]      elongate, expand, bend | bend_deg
//   [waypoints]  w_l, w_delta, quadrature, curve_samples, optimize_weights, max_iterations, fd_step,
//                armijo, shrink, initial_step, max_step, barzilai_borwein
//   [ratio]      bound, samples, activation, fd_step, max_iterations, pattern_step, pattern_min_step, motions
//   [pipeline]   relax_threshold, grid_joints, resolution ("18x36x36")
//   [edit.<joint>] tilt | tilt_deg, tilt_axis, cone_scale, or type = "revolute" | "ball" with
//                the fields of that edit
//   [run]        seed, dataset_poses, mirror, subsample, curve_samples, activation
namespace config_detail {

struct Entry {
  std::string key;  // section.name
  std::vector<std::string> values;

  [[noreturn]] void fail(const std::string& what) const { throw Error(key + ": " + what); }

  const std::string& scalar() const {
    if (values.size() != 1) fail("expected a single value");
    return values[0];
  }
  double number() const {
    const auto& s = scalar();
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) fail("expected a number, got '" + s + "'");
    return v;
  }
  double positive() const {
    const double v = number();
    if (!(v > 0.0)) fail("must be positive");
    return v;
  }
  long long integer() const {
    const auto& s = scalar();
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail("expected an integer, got '" + s + "'");
    return v;
  }
  int positive_int() const {
    const auto v = integer();
    if (v <= 0 || v > std::numeric_limits<int>::max()) fail("must be a positive integer");
    return static_cast<int>(v);
  }
  bool boolean() const {
    const auto& s = scalar();
    if (s == "true") return true;
    if (s == "false") return false;
    fail("expected true or false, got '" + s + "'");
  }
  Vec3 vec3() const {
    if (values.size() != 3) fail("expected 3 numbers");
    Vec3 v;
    for (int k = 0; k < 3; ++k) v[k] = Entry{key, {values[static_cast<std::size_t>(k)]}}.number();
    return v;
  }
};

inline void apply_descent(DescentConfig& d, const std::string& name, const Entry& e) {
  if (name == "max_iterations") d.max_iterations = e.positive_int();
  else if (name == "fd_step") d.fd_step = e.positive();
  else if (name == "armijo") d.armijo = e.positive();
  else if (name == "shrink") d.shrink = e.positive();
  else if (name == "initial_step") d.initial_step = e.positive();
  else if (name == "max_step") d.max_step = e.positive();
  else if (name == "barzilai_borwein") d.barzilai_borwein = e.boolean();
  else e.fail("unknown key");
}

inline void apply_joint_edit(std::map<std::string, Json>& pending, const std::string& joint, const std::string& name,
                             const Entry& e) {
  Json& j = pending[joint];
  if (name == "type") j["type"] = e.scalar();
  else if (name == "tilt_axis" || name == "cone_center") j[name] = to_json(e.vec3());
  else if (name == "re_aim") {
    if (e.values.size() != 4) e.fail("expected 4 numbers");
    j[name] = Json::array();
    for (const auto& v : e.values) j[name].push_back(Entry{e.key, {v}}.number());
  } else j[name] = e.number();
}

}  // namespace config_detail

inline RunConfig parse_config(std::string_view text, const std::string& source = "config") {
  using config_detail::Entry;
  std::vector<CLI::ConfigItem> items;
  try {
    std::istringstream in{std::string(text)};
    items = CLI::ConfigTOML().from_config(in);
  } catch (const CLI::Error& e) {
    throw Error(source + ": " + e.what());
  }
  RunConfig cfg;
  std::map<std::string, Json> pending_edits;
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    const Entry e{it.fullname(), it.inputs};
    const std::string section = it.parents.empty() ? "" : it.parents[0];
    const std::string& name = it.name;
    const std::size_t depth = it.parents.size();
    try {
      if (section == "skeleton" && depth == 1) {
        if (name == "global_scale") cfg.params.global_scale = e.positive();
        else if (name == "extremity_scale") cfg.params.extremity_scale = e.positive();
        else if (name == "symmetric") cfg.params.symmetric = e.boolean();
        else e.fail("unknown key");
      } else if (section == "bone" && depth == 2) {
        auto& b = cfg.params.bones[it.parents[1]];
        if (name == "elongate") b.elongate = e.positive();
        else if (name == "torsion") b.torsion = e.number();
        else if (name == "torsion_deg") b.torsion = deg2rad(e.number());
        else if (name == "proximal_head_scale") b.proximal_head_scale = e.positive();
        else if (name == "distal_head_scale") b.distal_head_scale = e.positive();
        else if (name == "mass_scale") b.mass_scale = e.positive();
        else e.fail("unknown key");
      } else if (section == "trunk" && depth == 1) {
        if (name == "elongate") cfg.params.trunk.elongate = e.positive();
        else if (name == "expand") cfg.params.trunk.expand = e.positive();
        else if (name == "bend") cfg.params.trunk.bend = e.number();
        else if (name == "bend_deg") cfg.params.trunk.bend = deg2rad(e.number());
        else e.fail("unknown key");
      } else if (section == "waypoints" && depth == 1) {
        auto& w = cfg.pipeline.waypoints;
        if (name == "w_l") w.w_l = e.number();
        else if (name == "w_delta") w.w_delta = e.number();
        else if (name == "quadrature") w.quadrature = e.positive_int();
        else if (name == "curve_samples") w.curve_samples = e.positive_int();
        else if (name == "optimize_weights") w.optimize_weights = e.boolean();
        else config_detail::apply_descent(w.descent, name, e);
      } else if (section == "ratio" && depth == 1) {
        auto& r = cfg.pipeline.ratio;
        if (name == "bound") r.bound = e.number();
        else if (name == "samples") r.samples = e.positive_int();
        else if (name == "activation") r.activation = e.number();
        else if (name == "fd_step") r.fd_step = e.positive();
        else if (name == "max_iterations") r.max_iterations = e.positive_int();
        else if (name == "pattern_step") r.pattern_step = e.positive();
        else if (name == "pattern_min_step") r.pattern_min_step = e.positive();
        else if (name == "motions") r.motions = e.values;
        else e.fail("unknown key");
      } else if (section == "pipeline" && depth == 1) {
        auto& p = cfg.pipeline;
        if (name == "relax_threshold") p.relax_threshold = e.number();
        else if (name == "grid_joints") p.grid_joints = e.values;
        else if (name == "resolution") p.resolution = parse_resolution(e.scalar());
        else e.fail("unknown key");
      } else if (section == "edit" && depth == 2) {
        config_detail::apply_joint_edit(pending_edits, it.parents[1], name, e);
      } else if (section == "run" && depth == 1) {
        auto& r = cfg.run;
        if (name == "seed") {
          const auto v = e.integer();
          if (v < 0) e.fail("must be non-negative");
          r.seed = static_cast<std::uint64_t>(v);
        } else if (name == "dataset_poses") r.dataset_poses = static_cast<std::size_t>(e.positive_int());
        else if (name == "mirror") r.mirror = e.boolean();
        else if (name == "subsample") r.subsample = e.positive();
        else if (name == "curve_samples") r.curve_samples = e.positive_int();
        else if (name == "activation") r.activation = e.number();
        else e.fail("unknown key");
      } else {
        e.fail("unknown section or key");
      }
    } catch (const Error& err) {
      throw Error(source + ": " + err.what());
    }
  }
  for (const auto& [joint, j] : pending_edits) {
    try {
      cfg.edits[joint] = edit_spec_from_json(j, "edit." + joint);
    } catch (const Error& err) {
      throw Error(source + ": " + err.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_text_file(path), path); }

/// Concrete edit for every configured joint; cone tilts are taken about the
/// reference cone center estimated from `dataset`.
inline RomEdit resolve_edits(const std::map<std::string, EditSpec>& specs, const Skeleton& skel, const PoseDataset& dataset) {
  RomEdit out;
  for (const auto& [joint, spec] : specs) {
    const Vec3 center = std::holds_alternative<ConeTilt>(spec) ? cone_center_from_dataset(skel, dataset, joint) : Vec3(-Vec3::UnitZ());
    out.joints[joint] = resolve_edit_spec(spec, center);
  }
  validate_edit(skel, out);
  return out;
}

}  // namespace msk
