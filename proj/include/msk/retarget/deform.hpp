#pragma once

#include "msk/core/model.hpp"
#include "msk/rom/dataset.hpp"

#include <map>
#include <set>

namespace msk {

struct BoneParams {
  double elongate = 1.0;
  double torsion = 0.0;  // radians
  double proximal_head_scale = 1.0;
  double distal_head_scale = 1.0;
  double mass_scale = 1.0;

  bool operator==(const BoneParams&) const = default;
};

struct TrunkParams {
  double elongate = 1.0;
  double expand = 1.0;
  double bend = 0.0;  // radians, spread evenly over the non-root trunk joints

  bool operator==(const TrunkParams&) const = default;
};

struct SkeletonParams {
  std::map<std::string, BoneParams> bones;  // keyed by bone id or by its side-less stem
  TrunkParams trunk;
  double extremity_scale = 1.0;  // hands and feet
  double global_scale = 1.0;     // L
  bool symmetric = true;         // an entry for one side also drives the other
  std::set<std::string> trunk_bones{"pelvis", "torso"};
  std::set<std::string> extremity_bones{"foot", "hand"};  // stems

  bool operator==(const SkeletonParams&) const = default;
};

inline std::string side_stem(const std::string& id) {
  if (id.size() > 2 && (id.ends_with("_l") || id.ends_with("_r"))) return id.substr(0, id.size() - 2);
  return id;
}

inline void validate_params(const Skeleton& skel, const SkeletonParams& p) {
  auto positive = [](double v, const std::string& what) {
    if (!(v > 0.0)) throw Error("skeleton params: " + what + " must be positive");
  };
  for (const auto& [id, b] : p.bones) {
    bool found = false;
    for (const auto& bone : skel.bones()) found = found || bone.id == id || side_stem(bone.id) == id;
    if (!found) throw Error("skeleton params: unknown bone '" + id + "'");
    positive(b.elongate, id + ".elongate");
    positive(b.proximal_head_scale, id + ".proximal_head_scale");
    positive(b.distal_head_scale, id + ".distal_head_scale");
    positive(b.mass_scale, id + ".mass_scale");
    if (!std::isfinite(b.torsion)) throw Error("skeleton params: " + id + ".torsion must be finite");
    if (p.symmetric && id != side_stem(id)) {
      const auto other = p.bones.find(mirror_bone_id(id));
      if (other != p.bones.end() && !(other->second == b))
        throw Error("skeleton params: symmetric entries '" + id + "' and '" + other->first + "' differ");
    }
  }
  positive(p.trunk.elongate, "trunk.elongate");
  positive(p.trunk.expand, "trunk.expand");
  positive(p.extremity_scale, "extremity_scale");
  positive(p.global_scale, "global_scale");
}

/// Parameters that apply to one bone after resolving side and stem keys.
/// Torsion is anatomical: right bones twist opposite to left bones about the
/// shared shaft axis, so equal values give a mirror-symmetric body.
inline BoneParams resolve_bone_params(const SkeletonParams& p, const std::string& id) {
  auto sided = [&](BoneParams b) {
    if (id.ends_with("_r")) b.torsion = -b.torsion;
    return b;
  };
  if (auto it = p.bones.find(id); it != p.bones.end()) return sided(it->second);
  if (p.symmetric)
    if (auto it = p.bones.find(mirror_bone_id(id)); it != p.bones.end()) return sided(it->second);
  if (auto it = p.bones.find(side_stem(id)); it != p.bones.end()) return sided(it->second);
  return {};
}

/// Maps bone-local points of a reference bone onto the deformed bone. A point is
/// anchored at its nearest shaft point t in [0, 1]; the shaft part is elongated,
/// the radial part is scaled by the head scale interpolated at t and twisted by
/// torsion * t. Axial overshoot past either end is carried unscaled.
struct BoneMap {
  Vec3 shaft = -Vec3::UnitZ();
  double length = 0.0;
  ShapeParams shape;

  double anchor(const Vec3& x) const {
    if (length <= 0.0) return 0.0;
    return std::clamp(x.dot(shaft) / length, 0.0, 1.0);
  }

  Quat twist_at(double t) const { return axis_angle(shaft, shape.torsion_angle * t); }

  Vec3 operator()(const Vec3& x) const {
    if (shape.identity()) return x;
    const double axial = x.dot(shaft);
    const double t = anchor(x);
    const double overshoot = axial - t * length;
    const Vec3 radial = x - axial * shaft;
    const double h = (1.0 - t) * shape.proximal_head_scale + t * shape.distal_head_scale;
    return shape.scale * (shaft * (t * length * shape.elongation + overshoot) + twist_at(t) * (h * radial));
  }
};

inline BoneMap bone_map(const Bone& reference, const ShapeParams& shape) {
  return {reference.shaft_axis, reference.shaft_length, shape};
}

/// Deformed skeleton. Every bone's `shape` records its deformation relative to
/// `reference`; joint centers move with the parent's map and torsion pre-rotates
/// the child frames.
inline Skeleton apply_skeleton_params(const Skeleton& reference, const SkeletonParams& p) {
  validate_params(reference, p);
  std::vector<ShapeParams> shapes(static_cast<std::size_t>(reference.size()));
  std::vector<double> mass_scale(shapes.size(), 1.0);
  int spine_joints = 0;
  for (int i = 0; i < reference.size(); ++i) {
    const Bone& b = reference.bone(i);
    if (p.trunk_bones.count(b.id) && b.joint_type != JointType::free_root) ++spine_joints;
  }
  for (int i = 0; i < reference.size(); ++i) {
    const Bone& b = reference.bone(i);
    const BoneParams bp = resolve_bone_params(p, b.id);
    auto& s = shapes[static_cast<std::size_t>(i)];
    s.elongation = bp.elongate;
    s.torsion_angle = bp.torsion;
    s.proximal_head_scale = bp.proximal_head_scale;
    s.distal_head_scale = bp.distal_head_scale;
    s.scale = p.global_scale;
    if (p.trunk_bones.count(b.id)) {
      s.elongation *= p.trunk.elongate;
      s.proximal_head_scale *= p.trunk.expand;
      s.distal_head_scale *= p.trunk.expand;
    }
    if (p.extremity_bones.count(side_stem(b.id))) s.scale *= p.extremity_scale;
    mass_scale[static_cast<std::size_t>(i)] = bp.mass_scale;
  }

  std::vector<Bone> out;
  for (int i = 0; i < reference.size(); ++i) {
    const Bone& ref = reference.bone(i);
    const auto ui = static_cast<std::size_t>(i);
    Bone b = ref;
    const BoneMap self = bone_map(ref, shapes[ui]);
    b.shape = shapes[ui];
    b.shaft_length = ref.shaft_length * shapes[ui].elongation * shapes[ui].scale;
    b.com = self(ref.com);
    const double e = shapes[ui].elongation;
    b.mass = ref.mass * mass_scale[ui];
    b.inertia = ref.inertia * (mass_scale[ui] * e * e);
    const int parent = reference.parent(i);
    if (parent >= 0) {
      const BoneMap pm = bone_map(reference.bone(parent), shapes[static_cast<std::size_t>(parent)]);
      b.local_offset = pm(ref.local_offset);
      b.rest_rotation = (pm.twist_at(pm.anchor(ref.local_offset)) * ref.rest_rotation).normalized();
      if (p.trunk_bones.count(ref.id) && p.trunk.bend != 0.0 && spine_joints > 0)
        b.rest_rotation = (b.rest_rotation * axis_angle(Vec3::UnitX(), p.trunk.bend / spine_joints)).normalized();
    }
    out.push_back(std::move(b));
  }
  return Skeleton(std::move(out));
}

/// Waypoints re-expressed through the bone maps of `target` (shapes relative to
/// `reference`); skinning weights are kept.
inline std::vector<MusculotendonUnit> initial_waypoint_guess(const std::vector<MusculotendonUnit>& muscles,
                                                             const Skeleton& reference, const Skeleton& target) {
  if (reference.size() != target.size()) throw Error("initial_waypoint_guess: skeleton topologies differ");
  std::vector<MusculotendonUnit> out = muscles;
  for (auto& m : out)
    for (auto& wp : m.waypoints)
      for (auto& s : wp.skin) {
        const Bone& ref = reference.bone(s.bone);
        const Bone& tgt = target.bone(s.bone);
        if (ref.id != tgt.id) throw Error("initial_waypoint_guess: bone order differs at '" + ref.id + "'");
        s.local = bone_map(ref, tgt.shape)(s.local);
      }
  return out;
}

struct ScalingFactors {
  double time = 1.0, force = 1.0, mass = 1.0, inertia = 1.0, velocity = 1.0, stiffness = 1.0, damping = 1.0;
};

/// Geometric-similarity exponents for a characteristic length ratio L.
inline ScalingFactors scaling_factors(double L) {
  if (!(L > 0.0)) throw Error("scale_physics: L must be positive");
  return {std::sqrt(L), L * L * L, L * L * L, std::pow(L, 5.0), std::sqrt(L), L * L, std::pow(L, 2.5)};
}

/// Mass, inertia and maximum isometric force scaled for length ratio L.
inline Model scale_physics(Model model, double L, ScalingFactors* factors = nullptr) {
  const auto f = scaling_factors(L);
  if (factors) *factors = f;
  std::vector<Bone> bones = model.skeleton.bones();
  for (auto& b : bones) {
    b.mass *= f.mass;
    b.inertia *= f.inertia;
  }
  model.skeleton = Skeleton(std::move(bones));
  for (auto& m : model.muscles) m.f_max *= f.force;
  return model;
}

/// Deformed model whose muscles follow the skeleton by anchoring alone, with
/// fiber and tendon lengths scaled by the change of rest-pose length. This is the
/// unretargeted baseline.
inline Model naive_retarget(const Model& reference, const SkeletonParams& p) {
  Model m = reference;
  m.skeleton = apply_skeleton_params(reference.skeleton, p);
  m.muscles = initial_waypoint_guess(reference.muscles, reference.skeleton, m.skeleton);
  const Pose rest_ref = reference.skeleton.rest_pose();
  const Pose rest_tgt = m.skeleton.rest_pose();
  for (std::size_t i = 0; i < m.muscles.size(); ++i) {
    const double l_ref = musculotendon_length(reference.muscles[i], reference.skeleton, rest_ref);
    const double l_tgt = musculotendon_length(m.muscles[i], m.skeleton, rest_tgt);
    const double ratio = l_ref > 0.0 ? l_tgt / l_ref : 1.0;
    m.muscles[i].l_m0 *= ratio;
    m.muscles[i].l_t0 *= ratio;
  }
  if (p.global_scale != 1.0) m = scale_physics(std::move(m), p.global_scale);
  return m;
}

}  // namespace msk
