#pragma once

#include "msk/core/characteristics.hpp"
#include "msk/dynamics/jacobian.hpp"

#include <optional>

namespace msk {

struct MuscleTorques {
  VecX torque;                      // generalized torque sum_m J_m^T f_m(a_m)
  std::vector<FiberState> fibers;   // per-muscle equilibrium, same order as the model
  bool all_converged = true;
};

/// Sum over muscles of Jacobian-mapped Hill tensions at the given activations.
inline MuscleTorques joint_torques(const Model& model, const Pose& pose, std::span<const double> activations) {
  if (activations.size() != model.muscles.size())
    throw Error("joint_torques: activation vector has " + std::to_string(activations.size()) + " entries, model has " +
                std::to_string(model.muscles.size()) + " muscles");
  validate_pose(model.skeleton, pose);
  const auto world = world_transforms(model.skeleton, pose);
  MuscleTorques out;
  out.torque = VecX::Zero(model.skeleton.dof_count());
  for (std::size_t i = 0; i < model.muscles.size(); ++i) {
    const double a = activations[i];
    if (!(a >= 0.0 && a <= 1.0)) throw Error("joint_torques: activation out of [0, 1] for muscle '" + model.muscles[i].id + "'");
    const auto& m = model.muscles[i];
    const auto fs = fiber_equilibrium(m, model.curves, musculotendon_length(m, world), a);
    out.all_converged = out.all_converged && fs.converged;
    if (fs.force != 0.0) out.torque += muscle_jacobian(m, model.skeleton, world) * fs.force;
    out.fibers.push_back(fs);
  }
  return out;
}

/// Moment arm r = (J_m^T f) . n / f about `axis` (joint frame) at `joint`.
/// Empty when the muscle carries no tension at the evaluation activation.
inline std::optional<double> moment_arm(const Model& model, const MusculotendonUnit& m, std::string_view joint,
                                        const Vec3& axis, const Pose& pose, double activation = 1.0) {
  validate_pose(model.skeleton, pose);
  const auto world = world_transforms(model.skeleton, pose);
  const auto fs = fiber_equilibrium(m, model.curves, musculotendon_length(m, world), activation);
  if (!(fs.force > 0.0)) return std::nullopt;
  const int j = model.skeleton.joint_index(joint);
  const VecX tau = muscle_jacobian(m, model.skeleton, world) * fs.force;
  return joint_torque_about(model.skeleton, pose, j, axis.normalized(), tau) / fs.force;
}

struct TorqueCurve {
  std::string motion;
  std::vector<double> theta;
  std::vector<double> torque;  // N m along the motion direction
  double peak_theta = 0.0;     // parabolic-refined argmax
  double peak_torque = 0.0;
  bool flat = false;           // no unique argmax; peak_theta tie-broken to the lowest sample
};

/// Net torque of the muscles registered on `motion`, all at `activation`, over
/// the normalized sweep with every other joint at the model's conditioning pose.
inline TorqueCurve torque_angle_curve(const Model& model, const JointMotion& motion, int samples = 41,
                                      double activation = 1.0) {
  if (samples < 3) throw Error("torque_angle_curve: need at least 3 samples");
  TorqueCurve c;
  c.motion = motion.id;
  const auto group = muscles_in_motion(model, motion.id);
  const Pose base = model.conditioning_pose();
  for (int i = 0; i < samples; ++i) {
    const double theta = static_cast<double>(i) / (samples - 1);
    const Pose pose = apply_motion(model, motion, base, theta);
    const auto world = world_transforms(model.skeleton, pose);
    VecX tau = VecX::Zero(model.skeleton.dof_count());
    for (int mi : group) {
      const auto& m = model.muscles[static_cast<std::size_t>(mi)];
      const auto fs = fiber_equilibrium(m, model.curves, musculotendon_length(m, world), activation);
      if (fs.force != 0.0) tau += muscle_jacobian(m, model.skeleton, world) * fs.force;
    }
    c.theta.push_back(theta);
    c.torque.push_back(group.empty() ? 0.0 : motion_torque(model, motion, pose, tau));
  }
  const auto peak = refined_argmax(c.torque);
  c.peak_theta = peak.theta;
  c.peak_torque = peak.value;
  c.flat = peak.flat;
  return c;
}

inline TorqueCurve torque_angle_curve(const Model& model, std::string_view motion, int samples = 41,
                                      double activation = 1.0) {
  return torque_angle_curve(model, model.motion(motion), samples, activation);
}

}  // namespace msk
