#pragma once

#include "msk/core/model.hpp"

#include <span>

namespace msk {

/// Adds the generalized force produced by world force `f` acting at world
/// point `y` rigidly attached to bone `bone` into `tau`.
inline void accumulate_point_force(const Skeleton& skel, std::span<const Transform> world, int bone, const Vec3& y,
                                   const Vec3& f, VecX& tau) {
  for (int a = bone; a >= 0; a = skel.parent(a)) {
    const auto& T = world[static_cast<std::size_t>(a)];
    const Mat3 R = T.linear();
    const Vec3 moment = (y - T.translation()).cross(f);
    const int o = skel.dof_offset(a);
    switch (skel.bone(a).joint_type) {
      case JointType::free_root:
        tau.segment<3>(o) += R.transpose() * moment;
        tau.segment<3>(o + 3) += R.transpose() * f;
        break;
      case JointType::ball_and_socket: tau.segment<3>(o) += R.transpose() * moment; break;
      case JointType::revolute: tau[o] += (R * skel.bone(a).joint_axis).dot(moment); break;
    }
  }
}

/// Generalized force per unit tendon tension: J_m^T * 1 = -dl_mt/dq.
inline VecX muscle_jacobian(const MusculotendonUnit& m, const Skeleton& skel, std::span<const Transform> world) {
  VecX tau = VecX::Zero(skel.dof_count());
  const auto pts = waypoint_positions(m, world);
  std::vector<Vec3> forces(pts.size(), Vec3::Zero());
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const Vec3 d = pts[k + 1] - pts[k];
    const double len = d.norm();
    if (len < 1e-12) continue;
    const Vec3 u = d / len;
    forces[k] += u;
    forces[k + 1] -= u;
  }
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (forces[k].isZero(0.0)) continue;
    for (const auto& s : m.waypoints[k].skin) {
      const Vec3 y = world[static_cast<std::size_t>(s.bone)] * s.local;
      accumulate_point_force(skel, world, s.bone, y, s.weight * forces[k], tau);
    }
  }
  return tau;
}

inline VecX muscle_jacobian(const Model& model, const MusculotendonUnit& m, const Pose& pose) {
  validate_pose(model.skeleton, pose);
  const auto world = world_transforms(model.skeleton, pose);
  return muscle_jacobian(m, model.skeleton, world);
}

/// Component of a generalized force about `axis` (joint frame) at joint `j`.
/// Ball joints map the child-frame torque into the joint frame first; revolute
/// joints project their scalar torque onto the axis.
inline double joint_torque_about(const Skeleton& skel, const Pose& pose, int j, const Vec3& axis, const VecX& tau) {
  const Bone& b = skel.bone(j);
  const int o = skel.dof_offset(j);
  switch (b.joint_type) {
    case JointType::ball_and_socket:
      return (pose.joints[static_cast<std::size_t>(j)].rotation * Vec3(tau.segment<3>(o))).dot(axis);
    case JointType::revolute: return tau[o] * b.joint_axis.dot(axis);
    case JointType::free_root: throw Error("joint_torque_about: free root has no joint axis");
  }
  return 0.0;
}

/// Generalized torque conjugate to a motion's sweep angle, signed along the sweep direction.
inline double motion_torque(const Model& model, const JointMotion& motion, const Pose& pose, const VecX& tau) {
  const int j = model.skeleton.joint_index(motion.joint);
  const Bone& b = model.skeleton.bone(j);
  const Vec3 axis = b.joint_type == JointType::revolute ? b.joint_axis : motion.axis;
  return motion.direction() * joint_torque_about(model.skeleton, pose, j, axis, tau);
}

}  // namespace msk
