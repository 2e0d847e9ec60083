#pragma once

#include "msk/core/muscle.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace msk {

/// A registered joint motion: the joint coordinate is swept from `lower` to
/// `upper` radians as the normalized angle goes 0 -> 1. Ball joints rotate
/// about `axis` (joint frame); revolute joints use their own axis.
struct JointMotion {
  std::string id;
  std::string joint;  // joint name or bone id
  Vec3 axis = Vec3::UnitX();
  double lower = 0.0;
  double upper = 1.0;

  double angle_at(double theta) const { return lower + theta * (upper - lower); }
  double direction() const { return upper >= lower ? 1.0 : -1.0; }
};

struct KeyPose {
  std::string name;
  Pose pose;
};

struct Model {
  std::string name = "model";
  Skeleton skeleton;
  std::vector<MusculotendonUnit> muscles;
  CurveSet curves;
  std::vector<JointMotion> motions;
  std::vector<KeyPose> keyposes;
  Vec3 gravity = Vec3(0.0, 0.0, -9.81);

  int muscle_index(std::string_view id) const {
    for (std::size_t i = 0; i < muscles.size(); ++i)
      if (muscles[i].id == id) return static_cast<int>(i);
    throw Error("unknown muscle id '" + std::string(id) + "'");
  }

  const MusculotendonUnit& muscle(std::string_view id) const {
    return muscles[static_cast<std::size_t>(muscle_index(id))];
  }

  const JointMotion& motion(std::string_view id) const {
    for (const auto& m : motions)
      if (m.id == id) return m;
    throw Error("unknown joint motion '" + std::string(id) + "'");
  }

  const KeyPose* keypose(std::string_view key) const {
    for (const auto& k : keyposes)
      if (k.name == key) return &k;
    return nullptr;
  }

  /// Pose used to hold the joints not being swept (the standing key-pose when present).
  Pose conditioning_pose() const {
    if (const auto* k = keypose("standing")) return k->pose;
    return skeleton.rest_pose();
  }
};

/// Pose with the motion's joint driven to normalized angle theta.
inline Pose apply_motion(const Model& model, const JointMotion& motion, const Pose& base, double theta) {
  Pose p = base;
  const int j = model.skeleton.joint_index(motion.joint);
  const Bone& b = model.skeleton.bone(j);
  const double angle = motion.angle_at(theta);
  auto& c = p.joints[static_cast<std::size_t>(j)];
  if (b.joint_type == JointType::revolute)
    c.angle = angle;
  else if (b.joint_type == JointType::ball_and_socket)
    c.rotation = axis_angle(motion.axis, angle);
  else
    throw Error("motion '" + motion.id + "' targets the free root");
  return p;
}

inline void validate_muscle(const MusculotendonUnit& m, const Skeleton& skel) {
  const std::string where = "muscle '" + m.id + "'";
  if (m.waypoints.size() < 2) throw Error(where + ": needs at least 2 waypoints");
  for (std::size_t k = 0; k < m.waypoints.size(); ++k) {
    const auto& wp = m.waypoints[k];
    const std::string wpw = where + " waypoint " + std::to_string(k);
    if (wp.skin.empty()) throw Error(wpw + ": empty skinning list");
    double sum = 0.0;
    for (const auto& s : wp.skin) {
      if (s.bone < 0 || s.bone >= skel.size()) throw Error(wpw + ": bone index out of range");
      if (!(s.weight >= 0.0)) throw Error(wpw + ": negative skinning weight");
      sum += s.weight;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(wpw + ": skinning weights sum to " + std::to_string(sum));
  }
  if (!(m.l_m0 > 0.0)) throw Error(where + ": l_m0 must be positive");
  if (!(m.l_t0 >= 0.0)) throw Error(where + ": l_t0 must be non-negative");
  if (!(m.pennation >= 0.0 && m.pennation < kPi / 2)) throw Error(where + ": pennation must lie in [0, pi/2)");
  if (!(m.f_max > 0.0)) throw Error(where + ": f_max must be positive");
  if (!(m.k_m > 1.0)) throw Error(where + ": k_m must exceed 1");
  if (!(m.k_t >= 1.0)) throw Error(where + ": k_t must be at least 1");
}

inline void validate_model(const Model& model) {
  for (const auto& m : model.muscles) {
    validate_muscle(m, model.skeleton);
    for (const auto& id : m.motions) (void)model.motion(id);
  }
  for (std::size_t i = 0; i < model.muscles.size(); ++i)
    for (std::size_t j = i + 1; j < model.muscles.size(); ++j)
      if (model.muscles[i].id == model.muscles[j].id) throw Error("duplicate muscle id '" + model.muscles[i].id + "'");
  for (const auto& mo : model.motions) {
    const int j = model.skeleton.joint_index(mo.joint);
    if (model.skeleton.bone(j).joint_type == JointType::free_root)
      throw Error("motion '" + mo.id + "' targets the free root");
    if (std::abs(mo.axis.norm() - 1.0) > 1e-9) throw Error("motion '" + mo.id + "': axis must be unit");
  }
  for (const auto& k : model.keyposes) validate_pose(model.skeleton, k.pose);
}

/// Muscles registered on a motion.
inline std::vector<int> muscles_in_motion(const Model& model, std::string_view motion) {
  std::vector<int> out;
  for (std::size_t i = 0; i < model.muscles.size(); ++i) {
    const auto& ms = model.muscles[i].motions;
    if (std::find(ms.begin(), ms.end(), motion) != ms.end()) out.push_back(static_cast<int>(i));
  }
  return out;
}

/// Dof count excluding the free root.
inline int joint_dof_count(const Skeleton& s) { return s.dof_count() - 6; }

}  // namespace msk
