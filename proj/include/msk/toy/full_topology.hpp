#pragma once

#include "msk/toy/toy_model.hpp"

namespace msk::toy {

/// Synthetic full-body model with the reference topology counts: a free root,
/// 13 ball-and-socket joints, 5 revolute joints (50 DoF) and 282 musculotendon
/// units (141 per side). Geometry is schematic; it exercises loading, hashing
/// and whole-body dynamics at scale.
inline Model make_full_topology_model() {
  std::vector<Bone> bones;
  bones.push_back(make_bone("pelvis", "", JointType::free_root, Vec3::Zero(), Vec3::UnitZ(), 0.20, 10.0));
  bones.push_back(make_bone("spine", "pelvis", JointType::ball_and_socket, {0, 0, 0.10}, Vec3::UnitZ(), 0.20, 12.0));
  bones.push_back(make_bone("chest", "spine", JointType::ball_and_socket, {0, 0, 0.20}, Vec3::UnitZ(), 0.25, 15.0));
  bones.push_back(make_bone("neck", "chest", JointType::ball_and_socket, {0, 0, 0.25}, Vec3::UnitZ(), 0.10, 2.0));
  bones.push_back(make_bone("head", "neck", JointType::revolute, {0, 0, 0.10}, Vec3::UnitZ(), 0.20, 4.5));
  for (const char* side : {"_l", "_r"}) {
    const bool left = std::string(side) == "_l";
    auto P = [&](Vec3 p) { return left ? p : mirror_point(p); };
    auto A = [&](Vec3 a) { return left ? a : mirror_axis(a); };
    const std::string s = side;
    bones.push_back(make_bone("clavicle" + s, "chest", JointType::ball_and_socket, P({0.02, 0.03, 0.22}), P(Vec3::UnitX()), 0.15, 0.5));
    bones.push_back(make_bone("humerus" + s, "clavicle" + s, JointType::ball_and_socket, P({0.15, 0, 0}), -Vec3::UnitZ(), 0.30, 2.0));
    bones.push_back(make_bone("ulna" + s, "humerus" + s, JointType::revolute, {0, 0, -0.30}, -Vec3::UnitZ(), 0.27, 1.5, A(Vec3::UnitX())));
    bones.push_back(make_bone("hand" + s, "ulna" + s, JointType::ball_and_socket, {0, 0, -0.27}, -Vec3::UnitZ(), 0.18, 0.4));
    bones.push_back(make_bone("femur" + s, "pelvis", JointType::ball_and_socket, P({0.09, 0, -0.05}), -Vec3::UnitZ(), 0.42, 8.0));
    bones.push_back(make_bone("tibia" + s, "femur" + s, JointType::revolute, {0, 0, -0.42}, -Vec3::UnitZ(), 0.40, 3.5, A(-Vec3::UnitX())));
    bones.push_back(make_bone("foot" + s, "tibia" + s, JointType::ball_and_socket, {0, 0, -0.40}, Vec3::UnitY(), 0.18, 1.0));
  }
  for (auto& b : bones) b.joint = b.id;

  Model m;
  m.name = "full_topology";
  m.skeleton = Skeleton(std::move(bones));
  const Skeleton& skel = m.skeleton;

  // Muscles cycle over the bone pairs they may span (parent-child and
  // grandparent-child), with deterministic attachment offsets.
  std::mt19937_64 rng(282);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  std::vector<std::pair<std::string, std::string>> spans_l;
  for (const auto& b : skel.bones()) {
    if (b.parent.empty() || b.id.ends_with("_r")) continue;
    spans_l.emplace_back(b.parent, b.id);
    const auto& parent = skel.bone(skel.index_of(b.parent));
    if (!parent.parent.empty()) spans_l.emplace_back(parent.parent, b.id);
  }
  const Pose rest = skel.rest_pose();
  for (int k = 0; k < 141; ++k) {
    const auto& [origin, insertion] = spans_l[static_cast<std::size_t>(k) % spans_l.size()];
    const Bone& ob = skel.bone(skel.index_of(origin));
    const Bone& ib = skel.bone(skel.index_of(insertion));
    const Vec3 o = ob.shaft_axis * (ob.shaft_length * U(0.2, 0.8)) + Vec3(U(-0.03, 0.03), U(-0.03, 0.03), U(-0.03, 0.03));
    const Vec3 i = ib.shaft_axis * (ib.shaft_length * U(0.1, 0.5)) + Vec3(U(-0.03, 0.03), U(-0.03, 0.03), U(-0.03, 0.03));
    const double rho = U(0.3, 2.0);
    const double f_max = U(200.0, 2500.0);
    for (const char* side : {"_l", "_r"}) {
      const bool left = std::string(side) == "_l";
      auto sided = [&](const std::string& id) { return left || !id.ends_with("_l") ? id : id.substr(0, id.size() - 2) + "_r"; };
      MusculotendonUnit mu;
      mu.id = "muscle" + std::to_string(k) + side;
      mu.waypoints.push_back({{{skel.index_of(sided(origin)), 1.0, left ? o : mirror_point(o)}}});
      mu.waypoints.push_back({{{skel.index_of(sided(insertion)), 1.0, left ? i : mirror_point(i)}}});
      const double l = musculotendon_length(mu, skel, rest);
      mu.l_m0 = 1.2 * l / (1.0 + rho);
      mu.l_t0 = rho * mu.l_m0;
      mu.f_max = f_max;
      m.muscles.push_back(std::move(mu));
    }
  }
  m.keyposes = {{"standing", skel.rest_pose()}};
  validate_model(m);
  return m;
}

}  // namespace msk::toy
