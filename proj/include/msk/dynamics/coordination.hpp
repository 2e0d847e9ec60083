#pragma once

#include "msk/dynamics/lcp.hpp"
#include "msk/dynamics/muscle_forces.hpp"
#include "msk/dynamics/qp.hpp"

namespace msk {

struct CoordinationResult {
  ConstraintSet limits;
  MuscleQpResult muscles;
};

/// Staged solve: joint-limit LCP under passive muscle tension, then the
/// activation QP with the resulting constraint force held fixed.
inline CoordinationResult coordinate_muscles(const Model& model, const DynamicsState& state, const VecX& qdd_desired,
                                             double w_reg = 0.01, double dt = 1e-3) {
  const auto activations = ActivationVector::zeros(static_cast<int>(model.muscles.size()));
  const auto passive = joint_torques(model, state.pose, activations.span());
  CoordinationResult r{solve_joint_limit_lcp(model, state, passive.torque, dt),
                       MuscleQpResult{ActivationVector{}, VecX{}, VecX{}}};
  r.muscles = solve_muscle_qp(model, state, qdd_desired, w_reg, &r.limits.generalized_force);
  return r;
}

}  // namespace msk
