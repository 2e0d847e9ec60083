#pragma once

#include "msk/rom/estimate.hpp"

#include <random>

namespace msk::toy {

// Frame: +x is the body's left, +y forward, +z up. Left-side data is written
// once and mirrored (positions negate x, rotation axes negate y and z).

inline Vec3 mirror_point(const Vec3& p) { return {-p.x(), p.y(), p.z()}; }
inline Vec3 mirror_axis(const Vec3& a) { return {a.x(), -a.y(), -a.z()}; }

inline Mat3 rod_inertia(double mass, double length) {
  const double t = mass * length * length / 12.0;
  Mat3 I = Mat3::Zero();
  I.diagonal() << t, t, t;
  return I + Mat3::Identity() * (0.05 * t + 1e-4);
}

inline Bone make_bone(std::string id, std::string parent, JointType type, Vec3 offset, Vec3 shaft, double length,
                      double mass, Vec3 joint_axis = Vec3::UnitX()) {
  Bone b;
  b.id = std::move(id);
  b.parent = std::move(parent);
  b.joint_type = type;
  b.local_offset = offset;
  b.shaft_axis = shaft;
  b.shaft_length = length;
  b.mass = mass;
  b.com = shaft * (0.5 * length);
  b.inertia = rod_inertia(mass, length);
  b.joint_axis = joint_axis;
  return b;
}

inline std::vector<Bone> toy_bones() {
  std::vector<Bone> bones;
  bones.push_back(make_bone("pelvis", "", JointType::free_root, Vec3::Zero(), Vec3::UnitZ(), 0.20, 10.0));
  bones.push_back(make_bone("torso", "pelvis", JointType::ball_and_socket, {0, 0, 0.10}, Vec3::UnitZ(), 0.45, 25.0));
  bones.push_back(make_bone("neck", "torso", JointType::ball_and_socket, {0, 0, 0.45}, Vec3::UnitZ(), 0.25, 5.0));
  for (const char* side : {"_l", "_r"}) {
    const bool left = std::string(side) == "_l";
    auto P = [&](Vec3 p) { return left ? p : mirror_point(p); };
    auto A = [&](Vec3 a) { return left ? a : mirror_axis(a); };
    const std::string s = side;
    bones.push_back(make_bone("humerus" + s, "torso", JointType::ball_and_socket, P({0.18, 0, 0.40}), -Vec3::UnitZ(), 0.30, 2.0));
    bones.push_back(make_bone("ulna" + s, "humerus" + s, JointType::revolute, {0, 0, -0.30}, -Vec3::UnitZ(), 0.27, 1.5, A(Vec3::UnitX())));
    bones.push_back(make_bone("femur" + s, "pelvis", JointType::ball_and_socket, P({0.09, 0, -0.05}), -Vec3::UnitZ(), 0.42, 8.0));
    bones.push_back(make_bone("tibia" + s, "femur" + s, JointType::revolute, {0, 0, -0.42}, -Vec3::UnitZ(), 0.40, 3.5, A(-Vec3::UnitX())));
    bones.push_back(make_bone("foot" + s, "tibia" + s, JointType::revolute, {0, 0, -0.40}, Vec3::UnitY(), 0.18, 1.0, A(Vec3::UnitX())));
  }
  for (auto& b : bones) b.joint = b.id;
  // Joint names follow anatomy rather than the driven bone.
  for (auto& b : bones) {
    const std::string stem = b.id.substr(0, b.id.find('_'));
    const std::string side = b.id.size() > 2 && b.id[b.id.size() - 2] == '_' ? b.id.substr(b.id.size() - 2) : "";
    if (stem == "humerus") b.joint = "shoulder" + side;
    if (stem == "ulna") b.joint = "elbow" + side;
    if (stem == "femur") b.joint = "hip" + side;
    if (stem == "tibia") b.joint = "knee" + side;
    if (stem == "foot") b.joint = "ankle" + side;
    if (stem == "torso") b.joint = "lumbar";
    if (stem == "neck") b.joint = "cervical";
  }
  return bones;
}

inline std::vector<JointMotion> toy_motions() {
  std::vector<JointMotion> out;
  auto pair = [&](const std::string& a, const std::string& b, const std::string& joint, Vec3 axis, double lo, double hi) {
    out.push_back({a, joint, axis, lo, hi});
    out.push_back({b, joint, axis, hi, lo});
  };
  for (const char* side : {"_l", "_r"}) {
    const bool left = std::string(side) == "_l";
    const std::string s = side;
    auto A = [&](Vec3 a) { return left ? a : mirror_axis(a); };
    pair("hip_flexion" + s, "hip_extension" + s, "hip" + s, A(Vec3::UnitX()), -0.3, 1.6);
    pair("hip_abduction" + s, "hip_adduction" + s, "hip" + s, A(-Vec3::UnitY()), -0.35, 0.75);
    pair("hip_lateral_rotation" + s, "hip_medial_rotation" + s, "hip" + s, A(-Vec3::UnitZ()), -0.6, 0.7);
    pair("knee_flexion" + s, "knee_extension" + s, "knee" + s, Vec3::UnitX(), 0.0, 2.2);
    pair("ankle_dorsiflexion" + s, "ankle_plantarflexion" + s, "ankle" + s, Vec3::UnitX(), -0.6, 0.4);
    pair("elbow_flexion" + s, "elbow_extension" + s, "elbow" + s, Vec3::UnitX(), 0.0, 2.4);
    pair("shoulder_flexion" + s, "shoulder_extension" + s, "shoulder" + s, A(Vec3::UnitX()), -0.5, 1.5);
  }
  pair("trunk_flexion", "trunk_extension", "lumbar", -Vec3::UnitX(), -0.4, 1.0);
  return out;
}

struct MuscleSpec {
  std::string id;
  std::vector<std::vector<std::tuple<std::string, double, Vec3>>> waypoints;  // (bone stem or id, weight, local)
  double rho;
  double f_max;
  double pennation;
  std::vector<std::string> motions;  // stems; side suffix appended for sided muscles
};

inline std::vector<MuscleSpec> toy_muscle_specs() {
  using W = std::tuple<std::string, double, Vec3>;
  auto one = [](std::string bone, Vec3 p) { return std::vector<W>{W{std::move(bone), 1.0, p}}; };
  auto blend = [](std::string a, Vec3 pa, std::string b, Vec3 pb, double wa = 0.5) {
    return std::vector<W>{W{std::move(a), wa, pa}, W{std::move(b), 1.0 - wa, pb}};
  };
  return {
      {"iliacus", {one("pelvis", {0.06, 0.04, 0.08}), one("pelvis", {0.07, 0.06, -0.015}), one("femur", {-0.01, 0.02, -0.07})},
       0.5, 1000, 0.0, {"hip_flexion", "hip_lateral_rotation"}},
      {"glutmax",
       {one("pelvis", {0.03, -0.10, 0.06}), blend("pelvis", {0.10, -0.07, -0.08}, "femur", {0.01, -0.07, -0.03}),
        one("femur", {0.03, -0.02, -0.12})},
       0.6, 1500, 0.0, {"hip_extension", "hip_lateral_rotation"}},
      {"hamstring",
       {one("pelvis", {0.07, -0.05, -0.12}), one("femur", {0.0, -0.06, -0.20}),
        one("tibia", {0.0, -0.04, -0.06})},
       1.2, 2000, 0.0, {"hip_extension", "hip_adduction", "knee_flexion"}},
      {"rectfem",
       {one("pelvis", {0.08, 0.06, -0.02}), one("femur", {0.0, 0.043, -0.445}), one("tibia", {0.0, 0.045, -0.07})},
       1.0, 1200, 0.0, {"hip_flexion", "hip_abduction", "knee_extension"}},
      {"vastus",
       {one("femur", {0.02, 0.03, -0.12}), one("femur", {0.0, 0.043, -0.445}), one("tibia", {0.0, 0.045, -0.07})},
       0.8, 3000, 0.08, {"knee_extension"}},
      {"bicfemsh", {one("femur", {0.03, -0.035, -0.32}), one("tibia", {0.03, -0.02, -0.06})}, 1.0, 800, 0.0,
       {"knee_flexion"}},
      {"gastroc", {one("femur", {0.0, -0.03, -0.38}), one("tibia", {0.0, -0.05, -0.15}), one("foot", {0.0, -0.05, -0.03})},
       1.8, 1600, 0.15, {"knee_flexion", "ankle_plantarflexion"}},
      {"soleus", {one("tibia", {0.0, -0.03, -0.10}), one("tibia", {0.0, -0.05, -0.30}), one("foot", {0.0, -0.05, -0.03})},
       2.5, 2800, 0.3, {"ankle_plantarflexion"}},
      {"tibant", {one("tibia", {0.02, 0.03, -0.10}), one("tibia", {0.01, 0.04, -0.36}), one("foot", {-0.01, 0.06, 0.02})},
       1.5, 900, 0.0, {"ankle_dorsiflexion"}},
      {"glutmed", {one("pelvis", {0.12, -0.02, 0.08}), one("femur", {0.05, 0.0, -0.03})}, 0.5, 1200, 0.0, {"hip_abduction", "hip_medial_rotation"}},
      {"adductor", {one("pelvis", {0.02, 0.05, -0.10}), one("femur", {-0.02, 0.0, -0.25})}, 0.4, 1000, 0.0, {"hip_adduction", "hip_flexion"}},
      {"piriformis", {one("pelvis", {0.02, -0.08, 0.02}), one("femur", {0.04, -0.01, -0.01})}, 0.5, 400, 0.0,
       {"hip_lateral_rotation", "hip_abduction"}},
      {"biceps",
       {one("torso", {0.16, 0.04, 0.42}), one("humerus", {0.0, 0.03, -0.05}),
        blend("humerus", {0.0, 0.04, -0.26}, "ulna", {0.0, 0.04, 0.04}, 0.7), one("ulna", {0.0, 0.01, -0.03})},
       1.0, 600, 0.0, {"elbow_flexion"}},
      {"triceps",
       {one("humerus", {0.0, -0.03, -0.05}), one("humerus", {0.0, -0.03, -0.15}), one("ulna", {0.0, -0.02, 0.03})},
       0.8, 800, 0.0, {"elbow_extension"}},
      {"erector", {one("pelvis", {0.04, -0.06, 0.10}), one("torso", {0.04, -0.06, 0.30})}, 0.4, 1500, 0.0,
       {"trunk_extension"}},
      {"rectabd", {one("pelvis", {0.04, 0.08, 0.0}), one("torso", {0.04, 0.10, 0.25})}, 0.3, 800, 0.0, {"trunk_flexion"}},
  };
}

inline bool central_bone(const std::string& stem) { return stem == "pelvis" || stem == "torso" || stem == "neck"; }

inline std::vector<MusculotendonUnit> toy_muscles(const Skeleton& skel) {
  std::vector<MusculotendonUnit> out;
  const Pose rest = skel.rest_pose();
  for (const auto& spec : toy_muscle_specs()) {
    for (const char* side : {"_l", "_r"}) {
      const bool left = std::string(side) == "_l";
      MusculotendonUnit m;
      m.id = spec.id + side;
      m.f_max = spec.f_max;
      m.pennation = spec.pennation;
      for (const auto& wp : spec.waypoints) {
        Waypoint w;
        for (const auto& [bone, weight, local] : wp) {
          const std::string id = central_bone(bone) ? bone : bone + side;
          w.skin.push_back({skel.index_of(id), weight, left ? local : mirror_point(local)});
        }
        m.waypoints.push_back(std::move(w));
      }
      for (const auto& mo : spec.motions) m.motions.push_back(mo == "trunk_flexion" || mo == "trunk_extension" ? mo : mo + side);
      // Placeholder split of the rest length at the muscle's ratio; calibration overwrites it.
      const double l = musculotendon_length(m, skel, rest);
      m.l_m0 = l / (1.0 + spec.rho);
      m.l_t0 = spec.rho * m.l_m0;
      out.push_back(std::move(m));
    }
  }
  return out;
}

inline Pose keypose_zero_gravity(const Skeleton& skel) {
  Pose p = skel.rest_pose();
  auto set_ball = [&](const std::string& id, const Vec3& axis, double angle) {
    p.joints[static_cast<std::size_t>(skel.index_of(id))].rotation = axis_angle(axis, angle);
  };
  auto set_rev = [&](const std::string& id, double angle) { p.joints[static_cast<std::size_t>(skel.index_of(id))].angle = angle; };
  set_ball("torso", -Vec3::UnitX(), 0.2);
  for (const char* side : {"_l", "_r"}) {
    const std::string s = side;
    const bool left = s == "_l";
    const Vec3 flex = Vec3::UnitX();
    const Vec3 abd = left ? Vec3(-Vec3::UnitY()) : Vec3(Vec3::UnitY());
    p.joints[static_cast<std::size_t>(skel.index_of("femur" + s))].rotation = axis_angle(flex, 0.6) * axis_angle(abd, 0.15);
    set_ball("humerus" + s, abd, 0.5);
    set_rev("tibia" + s, 0.8);
    set_rev("ulna" + s, 0.9);
    set_rev("foot" + s, -0.2);
  }
  return p;
}

inline Pose keypose_t_pose(const Skeleton& skel) {
  Pose p = skel.rest_pose();
  p.joints[static_cast<std::size_t>(skel.index_of("humerus_l"))].rotation = axis_angle(-Vec3::UnitY(), kPi / 2);
  p.joints[static_cast<std::size_t>(skel.index_of("humerus_r"))].rotation = axis_angle(Vec3::UnitY(), kPi / 2);
  return p;
}

/// Uncalibrated toy model: skeleton, muscles (rest-length placeholder lengths),
/// motions and key-poses.
inline Model make_toy_skeleton_model() {
  Model m;
  m.name = "toy";
  m.skeleton = Skeleton(toy_bones());
  m.muscles = toy_muscles(m.skeleton);
  m.motions = toy_motions();
  m.keyposes = {{"standing", m.skeleton.rest_pose()},
                {"zero_gravity", keypose_zero_gravity(m.skeleton)},
                {"t_pose", keypose_t_pose(m.skeleton)}};
  validate_model(m);
  return m;
}

struct DatasetOptions {
  std::size_t poses = 5000;  // after mirroring
  std::uint64_t seed = 7;
  bool mirror = true;
};

/// Synthetic full-body pose dataset. Hip flexion reach grows with knee flexion,
/// mimicking hamstring-limited capture data.
inline PoseDataset toy_dataset(const Skeleton& skel, const DatasetOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  auto U = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto idx = [&](const std::string& id) { return static_cast<std::size_t>(skel.index_of(id)); };

  PoseDataset d;
  const std::size_t base = opt.mirror ? (opt.poses + 1) / 2 : opt.poses;
  d.poses.push_back(skel.rest_pose());
  d.poses.push_back(keypose_zero_gravity(skel));
  d.poses.push_back(keypose_t_pose(skel));
  while (d.poses.size() < base) {
    Pose p = skel.rest_pose();
    p.root_rotation = axis_angle(Vec3::UnitZ(), U(-kPi, kPi));
    p.root_translation = Vec3(U(-1, 1), U(-1, 1), U(0.8, 1.0));
    p.joints[idx("torso")].rotation =
        axis_angle(-Vec3::UnitX(), U(-0.4, 1.0)) * axis_angle(Vec3::UnitY(), U(-0.3, 0.3)) * axis_angle(Vec3::UnitZ(), U(-0.4, 0.4));
    p.joints[idx("neck")].rotation = axis_angle(-Vec3::UnitX(), U(-0.5, 0.7)) * axis_angle(Vec3::UnitZ(), U(-0.8, 0.8));
    for (const char* side : {"_l", "_r"}) {
      const std::string s = side;
      const bool left = s == "_l";
      auto R = [&](const Quat& q) { return left ? q : mirror_rotation(q); };
      const double knee = U(0.0, 2.3);
      const double flex = U(-0.3, 1.1 + 0.7 * std::min(knee / 2.0, 1.0));
      const Quat hip = axis_angle(Vec3::UnitX(), flex) * axis_angle(-Vec3::UnitY(), U(-0.35, 0.75)) *
                       axis_angle(-Vec3::UnitZ(), U(-0.6, 0.7));
      p.joints[idx("femur" + s)].rotation = R(hip);
      p.joints[idx("tibia" + s)].angle = knee;
      p.joints[idx("foot" + s)].angle = U(-0.6, 0.4);
      const Quat shoulder = axis_angle(Vec3::UnitX(), U(-0.5, 1.5)) * axis_angle(-Vec3::UnitY(), U(0.0, 1.6)) *
                            axis_angle(-Vec3::UnitZ(), U(-0.5, 0.5));
      p.joints[idx("humerus" + s)].rotation = R(shoulder);
      p.joints[idx("ulna" + s)].angle = U(0.0, 2.4);
    }
    d.poses.push_back(std::move(p));
  }
  if (opt.mirror) {
    d = mirror_dataset(skel, std::move(d));
    d.poses.resize(opt.poses);
  }
  return d;
}

/// Toy reference model with fiber and tendon lengths fitted to its dataset.
inline Model make_toy_model(const DatasetOptions& opt = {}) {
  Model m = make_toy_skeleton_model();
  const auto data = toy_dataset(m.skeleton, opt);
  return estimate_lengths(std::move(m), data);
}

}  // namespace msk::toy
