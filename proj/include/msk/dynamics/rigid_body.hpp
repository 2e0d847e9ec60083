#pragma once

#include "msk/core/model.hpp"

#include <Eigen/Cholesky>

namespace msk {

struct DynamicsState {
  Pose pose;
  VecX velocity;  // generalized velocity, see integrate()
  VecX external;  // tau_ext

  static DynamicsState at_rest(const Skeleton& skel, Pose pose) {
    return {std::move(pose), VecX::Zero(skel.dof_count()), VecX::Zero(skel.dof_count())};
  }
};

inline void validate_state(const Skeleton& skel, const DynamicsState& s) {
  validate_pose(skel, s.pose);
  if (s.velocity.size() != skel.dof_count()) throw Error("dynamics state: velocity dimension mismatch");
  if (s.external.size() != 0 && s.external.size() != skel.dof_count())
    throw Error("dynamics state: external torque dimension mismatch");
}

namespace detail {

/// Adds the columns of the world angular (Jw) and linear (Jv) velocity Jacobian
/// of world point `p` on bone `bone`.
inline void point_velocity_jacobian(const Skeleton& skel, std::span<const Transform> world, int bone, const Vec3& p,
                                    Eigen::Ref<Eigen::Matrix3Xd> Jw, Eigen::Ref<Eigen::Matrix3Xd> Jv) {
  for (int a = bone; a >= 0; a = skel.parent(a)) {
    const auto& T = world[static_cast<std::size_t>(a)];
    const Mat3 R = T.linear();
    const Vec3 r = p - T.translation();
    const int o = skel.dof_offset(a);
    switch (skel.bone(a).joint_type) {
      case JointType::free_root:
        for (int k = 0; k < 3; ++k) {
          Jw.col(o + k) = R.col(k);
          Jv.col(o + k) = R.col(k).cross(r);
          Jv.col(o + 3 + k) = R.col(k);
        }
        break;
      case JointType::ball_and_socket:
        for (int k = 0; k < 3; ++k) {
          Jw.col(o + k) = R.col(k);
          Jv.col(o + k) = R.col(k).cross(r);
        }
        break;
      case JointType::revolute: {
        const Vec3 axis = R * skel.bone(a).joint_axis;
        Jw.col(o) = axis;
        Jv.col(o) = axis.cross(r);
        break;
      }
    }
  }
}

}  // namespace detail

/// Joint-space inertia M(q) = sum_b m_b Jv_b^T Jv_b + Jw_b^T I_b Jw_b (composite form).
inline MatX mass_matrix(const Model& model, const Pose& pose) {
  const Skeleton& skel = model.skeleton;
  validate_pose(skel, pose);
  const auto world = world_transforms(skel, pose);
  const int n = skel.dof_count();
  MatX M = MatX::Zero(n, n);
  Eigen::Matrix3Xd Jw(3, n), Jv(3, n);
  for (int b = 0; b < skel.size(); ++b) {
    const Bone& bone = skel.bone(b);
    const auto& T = world[static_cast<std::size_t>(b)];
    const Vec3 c = T * bone.com;
    Jw.setZero();
    Jv.setZero();
    detail::point_velocity_jacobian(skel, world, b, c, Jw, Jv);
    const Mat3 R = T.linear();
    const Mat3 I = R * bone.inertia * R.transpose();
    M.noalias() += bone.mass * Jv.transpose() * Jv + Jw.transpose() * I * Jw;
  }
  return 0.5 * (M + M.transpose());
}

/// Recursive Newton-Euler inverse dynamics: returns M(q) qdd + c(q, qd)
/// (gravity included when `with_gravity`).
inline VecX inverse_dynamics(const Model& model, const Pose& pose, const VecX& qd, const VecX& qdd,
                             bool with_gravity = true) {
  const Skeleton& skel = model.skeleton;
  const int nb = skel.size();
  const auto world = world_transforms(skel, pose);
  std::vector<Vec3> omega(static_cast<std::size_t>(nb)), alpha(static_cast<std::size_t>(nb)),
      acc_origin(static_cast<std::size_t>(nb)), force(static_cast<std::size_t>(nb)),
      moment(static_cast<std::size_t>(nb));
  const Vec3 g = with_gravity ? model.gravity : Vec3::Zero();

  for (int i = 0; i < nb; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const Bone& b = skel.bone(i);
    const auto& T = world[ui];
    const Mat3 R = T.linear();
    const int o = skel.dof_offset(i);
    if (b.joint_type == JointType::free_root) {
      const Vec3 w = R * qd.segment<3>(o);
      const Vec3 v = R * qd.segment<3>(o + 3);
      omega[ui] = w;
      alpha[ui] = R * qdd.segment<3>(o);
      acc_origin[ui] = w.cross(v) + R * qdd.segment<3>(o + 3);
    } else {
      const auto up = static_cast<std::size_t>(skel.parent(i));
      Vec3 w_rel, a_rel;
      if (b.joint_type == JointType::ball_and_socket) {
        w_rel = R * qd.segment<3>(o);
        a_rel = R * qdd.segment<3>(o);
      } else {
        const Vec3 axis = R * b.joint_axis;
        w_rel = axis * qd[o];
        a_rel = axis * qdd[o];
      }
      const Vec3 r = T.translation() - world[up].translation();
      omega[ui] = omega[up] + w_rel;
      alpha[ui] = alpha[up] + omega[up].cross(w_rel) + a_rel;
      acc_origin[ui] = acc_origin[up] + alpha[up].cross(r) + omega[up].cross(omega[up].cross(r));
    }
    const Vec3 d = R * b.com;
    const Vec3 acc_com = acc_origin[ui] + alpha[ui].cross(d) + omega[ui].cross(omega[ui].cross(d));
    const Mat3 I = R * b.inertia * R.transpose();
    force[ui] = b.mass * (acc_com - g);
    moment[ui] = I * alpha[ui] + omega[ui].cross(I * omega[ui]) + d.cross(force[ui]);
  }

  VecX tau = VecX::Zero(skel.dof_count());
  for (int i = nb - 1; i >= 0; --i) {
    const auto ui = static_cast<std::size_t>(i);
    const Bone& b = skel.bone(i);
    const auto& T = world[ui];
    const Mat3 R = T.linear();
    const int o = skel.dof_offset(i);
    switch (b.joint_type) {
      case JointType::free_root:
        tau.segment<3>(o) = R.transpose() * moment[ui];
        tau.segment<3>(o + 3) = R.transpose() * force[ui];
        break;
      case JointType::ball_and_socket: tau.segment<3>(o) = R.transpose() * moment[ui]; break;
      case JointType::revolute: tau[o] = (R * b.joint_axis).dot(moment[ui]); break;
    }
    const int p = skel.parent(i);
    if (p >= 0) {
      const auto up = static_cast<std::size_t>(p);
      force[up] += force[ui];
      moment[up] += moment[ui] + (T.translation() - world[up].translation()).cross(force[ui]);
    }
  }
  return tau;
}

/// Coriolis, centrifugal and gravity terms c(q, qd).
inline VecX bias_forces(const Model& model, const DynamicsState& state) {
  validate_state(model.skeleton, state);
  return inverse_dynamics(model, state.pose, state.velocity, VecX::Zero(model.skeleton.dof_count()));
}

inline double kinetic_energy(const Model& model, const Pose& pose, const VecX& qd) {
  return 0.5 * qd.dot(mass_matrix(model, pose) * qd);
}

inline double potential_energy(const Model& model, const Pose& pose) {
  const auto world = world_transforms(model.skeleton, pose);
  double v = 0.0;
  for (int b = 0; b < model.skeleton.size(); ++b)
    v -= model.skeleton.bone(b).mass * model.gravity.dot(world[static_cast<std::size_t>(b)] * model.skeleton.bone(b).com);
  return v;
}

/// Forward dynamics qdd = M^-1 (tau - c).
inline VecX forward_dynamics(const Model& model, const DynamicsState& state, const VecX& tau) {
  const MatX M = mass_matrix(model, state.pose);
  return M.llt().solve(tau - bias_forces(model, state));
}

}  // namespace msk
