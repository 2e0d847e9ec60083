#pragma once

#include "msk/dynamics/muscle_forces.hpp"
#include "msk/rom/dataset.hpp"
#include "msk/rom/validity.hpp"

namespace msk {

/// Per-muscle maximum of the musculotendon length over a dataset.
inline std::vector<double> max_lengths_over(const Model& model, const PoseDataset& dataset) {
  if (dataset.empty()) throw Error("estimate_lengths: dataset is empty");
  std::vector<double> mx(model.muscles.size(), 0.0);
  for (std::size_t p = 0; p < dataset.poses.size(); ++p) {
    const auto world = world_transforms(model.skeleton, dataset.poses[p]);
    for (std::size_t i = 0; i < model.muscles.size(); ++i)
      mx[i] = std::max(mx[i], musculotendon_length(model.muscles[i], world));
  }
  return mx;
}

/// Splits a maximal length into (l_m0, l_t0) at fixed ratio rho = l_t0 / l_m0 so
/// the passive boundary sits exactly at `l_mt_max`. Reduces to
/// l_m0 = l_mt_max / (k_m + k_t rho) for default curves and zero pennation.
inline void split_max_length(MusculotendonUnit& m, const CurveSet& curves, double l_mt_max, double rho) {
  const double denom = m.k_m * std::cos(m.pennation) + rho * boundary_tendon_stretch(m, curves);
  m.l_m0 = l_mt_max / denom;
  m.l_t0 = rho * m.l_m0;
}

/// Fits every muscle's fiber and tendon lengths so its passive boundary equals
/// its maximal length over the dataset, keeping each l_t0 / l_m0 ratio.
inline Model estimate_lengths(Model model, const PoseDataset& dataset) {
  validate_dataset(model.skeleton, dataset);
  const auto mx = max_lengths_over(model, dataset);
  for (std::size_t i = 0; i < model.muscles.size(); ++i) {
    auto& m = model.muscles[i];
    if (!(mx[i] > 0.0)) throw Error("estimate_lengths: muscle '" + m.id + "' has zero length over the dataset");
    split_max_length(m, model.curves, mx[i], m.ratio());
  }
  return model;
}

/// Magnitude of the generalized torque restricted to joint `j` (vector norm for ball joints).
inline double joint_torque_magnitude(const Skeleton& skel, int j, const VecX& tau) {
  return tau.segment(skel.dof_offset(j), skel.dof_width(j)).norm();
}

struct RelaxResult {
  Model model;
  int iterations = 0;
  bool converged = true;
  std::vector<std::string> offending;  // muscles still loaded when the cap was hit
  double max_torque = 0.0;             // worst passive joint torque at exit (N m)
};

/// Grows l_m0 and l_t0 of the muscles loading a key-pose joint above
/// `torque_threshold` by `step` per iteration until every joint is below it.
inline RelaxResult relax_keyposes(Model model, std::span<const Pose> keyposes, double torque_threshold,
                                  double step = 1.01, int max_iterations = 500) {
  if (!(step > 1.0)) throw Error("relax_keyposes: step must exceed 1");
  if (!(torque_threshold >= 0.0)) throw Error("relax_keyposes: threshold must be non-negative");
  const Skeleton& skel = model.skeleton;
  for (const auto& k : keyposes) validate_pose(skel, k);
  const std::vector<double> zeros(model.muscles.size(), 0.0);

  RelaxResult r;
  for (r.iterations = 0;; ++r.iterations) {
    std::vector<bool> grow(model.muscles.size(), false);
    bool any = false;
    r.max_torque = 0.0;
    for (const auto& pose : keyposes) {
      const auto world = world_transforms(skel, pose);
      const auto passive = joint_torques(model, pose, zeros);
      std::vector<int> offending_joints;
      for (int j = 0; j < skel.size(); ++j) {
        if (skel.bone(j).joint_type == JointType::free_root) continue;
        const double t = joint_torque_magnitude(skel, j, passive.torque);
        r.max_torque = std::max(r.max_torque, t);
        if (t > torque_threshold) offending_joints.push_back(j);
      }
      if (offending_joints.empty()) continue;
      for (std::size_t i = 0; i < model.muscles.size(); ++i) {
        if (!(passive.fibers[i].force > 0.0)) continue;
        const VecX jm = muscle_jacobian(model.muscles[i], skel, world);
        for (int j : offending_joints)
          if (joint_torque_magnitude(skel, j, jm) > 0.0) grow[i] = any = true;
      }
    }
    if (!any) break;
    if (r.iterations >= max_iterations) {
      r.converged = false;
      for (std::size_t i = 0; i < grow.size(); ++i)
        if (grow[i]) r.offending.push_back(model.muscles[i].id);
      break;
    }
    for (std::size_t i = 0; i < grow.size(); ++i) {
      if (!grow[i]) continue;
      model.muscles[i].l_m0 *= step;
      model.muscles[i].l_t0 *= step;
    }
  }
  r.model = std::move(model);
  return r;
}

inline RelaxResult relax_keyposes(Model model, double torque_threshold, double step = 1.01, int max_iterations = 500) {
  std::vector<Pose> poses;
  for (const auto& k : model.keyposes) poses.push_back(k.pose);
  return relax_keyposes(std::move(model), poses, torque_threshold, step, max_iterations);
}

}  // namespace msk
