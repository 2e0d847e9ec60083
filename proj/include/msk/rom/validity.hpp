#pragma once

#include "msk/core/model.hpp"

#include <functional>
#include <span>

namespace msk {

/// Passive constraint C_i = k_m l_m0 - l_m, with l_m from the a = 0 equilibrium.
/// Non-negative inside the muscle's passive limit.
inline double passive_constraint(const MusculotendonUnit& m, const CurveSet& curves, double l_mt) {
  const auto fs = fiber_equilibrium(m, curves, l_mt, 0.0);
  if (!fs.converged) throw Error("passive_constraint: equilibrium did not converge for muscle '" + m.id + "'");
  return m.k_m * m.l_m0 - fs.fiber_length;
}

inline double passive_constraint(const Model& model, const MusculotendonUnit& m, const Pose& pose) {
  return passive_constraint(m, model.curves, musculotendon_length(m, model.skeleton, pose));
}

/// Length slack used when comparing a musculotendon length against its passive
/// boundary. Absorbs rounding in lengths estimated from the same poses.
inline constexpr double kValidityTolerance = 1e-9;

/// C_i >= 0 expressed on the musculotendon length; C_i decreases monotonically
/// in l_mt at zero activation, so the comparison is exact up to tolerance.
inline bool within_passive_limit(const MusculotendonUnit& m, const CurveSet& curves, double l_mt) {
  return l_mt <= passive_boundary_length(m, curves) + kValidityTolerance;
}

/// User-supplied implicit constraint; the pose is valid when it returns >= 0.
using AuxConstraint = std::function<double(const Model&, const Pose&)>;

inline bool is_valid(const Model& model, std::span<const Transform> world, const Pose& pose,
                     std::span<const AuxConstraint> aux = {}) {
  for (const auto& m : model.muscles)
    if (!within_passive_limit(m, model.curves, musculotendon_length(m, world))) return false;
  for (const auto& c : aux)
    if (!(c(model, pose) >= 0.0)) return false;
  return true;
}

inline bool is_valid(const Model& model, const Pose& pose, std::span<const AuxConstraint> aux = {}) {
  validate_pose(model.skeleton, pose);
  const auto world = world_transforms(model.skeleton, pose);
  return is_valid(model, world, pose, aux);
}

/// Ids of the muscles whose passive constraint is violated at `pose`.
inline std::vector<std::string> violated_muscles(const Model& model, const Pose& pose) {
  const auto world = world_transforms(model.skeleton, pose);
  std::vector<std::string> out;
  for (const auto& m : model.muscles)
    if (!within_passive_limit(m, model.curves, musculotendon_length(m, world))) out.push_back(m.id);
  return out;
}

}  // namespace msk
