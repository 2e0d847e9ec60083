#pragma once

#include "msk/dynamics/muscle_forces.hpp"
#include "msk/retarget/curves.hpp"
#include "msk/retarget/optimizer.hpp"
#include "msk/rom/estimate.hpp"

namespace msk {

struct RatioConfig {
  double bound = 0.30;  // ratios stay within [1 - bound, 1 + bound] of the reference
  int samples = 41;
  double activation = 1.0;
  double fd_step = 1e-3;  // relative to the reference ratio
  int max_iterations = 40;
  double pattern_step = 0.1;      // first coordinate-search step, relative to the reference ratio
  double pattern_min_step = 1e-3;
  std::vector<std::string> motions;  // empty: every motion with registered muscles
};

struct PeakShift {
  std::string motion;
  double reference = 0.0;
  double before = 0.0;
  double after = 0.0;
  bool flat = false;
};

struct RatioResult {
  Model model;
  std::vector<double> trace;  // E_apt, monotone non-increasing
  int iterations = 0;
  std::vector<PeakShift> peaks;
  std::vector<std::string> flagged;  // motions whose torque curve has no unique argmax
};

/// Angle-of-peak-torque problem with cached geometry: per motion sample the
/// musculotendon lengths and moment arms of the motion's muscles, which do not
/// depend on the fiber/tendon split.
class PeakTorqueProblem {
public:
  PeakTorqueProblem(const Model& target, const Model& reference, const RatioConfig& cfg)
      : model_(target), cfg_(cfg) {
    std::vector<std::string> ids = cfg.motions;
    if (ids.empty())
      for (const auto& mo : target.motions)
        if (!muscles_in_motion(target, mo.id).empty()) ids.push_back(mo.id);
    for (const auto& id : ids) {
      MotionCache c;
      c.id = id;
      const auto& motion = target.motion(id);
      c.group = muscles_in_motion(target, id);
      const auto ref_curve = torque_angle_curve(reference, reference.motion(id), cfg.samples, cfg.activation);
      c.reference_peak = ref_curve.peak_theta;
      for (const auto& pose : motion_sweep(target, motion, cfg.samples)) {
        const auto world = world_transforms(target.skeleton, pose);
        std::vector<double> lengths, arms;
        for (int mi : c.group) {
          const auto& m = target.muscles[static_cast<std::size_t>(mi)];
          lengths.push_back(musculotendon_length(m, world));
          arms.push_back(motion_torque(target, motion, pose, muscle_jacobian(m, target.skeleton, world)));
        }
        c.lengths.push_back(std::move(lengths));
        c.arms.push_back(std::move(arms));
      }
      motions_.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < target.muscles.size(); ++i) {
      const auto& m = target.muscles[i];
      boundary_.push_back(passive_boundary_length(m, target.curves));
      reference_ratio_.push_back(reference.muscle(m.id).ratio());
    }
    for (std::size_t j = 0; j < motions_.size(); ++j)
      for (int mi : motions_[j].group) {
        auto it = std::find(variables_.begin(), variables_.end(), mi);
        if (it == variables_.end()) {
          variables_.push_back(mi);
          touches_.emplace_back();
          it = variables_.end() - 1;
        }
        touches_[static_cast<std::size_t>(it - variables_.begin())].push_back(static_cast<int>(j));
      }
  }

  std::size_t motion_count() const { return motions_.size(); }
  const std::string& motion_id(std::size_t j) const { return motions_[j].id; }
  double reference_peak(std::size_t j) const { return motions_[j].reference_peak; }
  const std::vector<int>& variables() const { return variables_; }

  VecX initial() const {
    VecX x(static_cast<Eigen::Index>(variables_.size()));
    for (std::size_t k = 0; k < variables_.size(); ++k)
      x[static_cast<Eigen::Index>(k)] = model_.muscles[static_cast<std::size_t>(variables_[k])].ratio();
    return x;
  }

  VecX lower() const { return bounds(1.0 - cfg_.bound); }
  VecX upper() const { return bounds(1.0 + cfg_.bound); }
  VecX reference_ratios() const { return bounds(1.0); }

  VecX project(const VecX& x) const { return x.cwiseMax(lower()).cwiseMin(upper()); }

  /// Unit split for muscle `mi` at ratio `rho`, boundary length held fixed.
  MusculotendonUnit split(int mi, double rho) const {
    MusculotendonUnit m = model_.muscles[static_cast<std::size_t>(mi)];
    split_max_length(m, model_.curves, boundary_[static_cast<std::size_t>(mi)], rho);
    return m;
  }

  Extremum peak(std::size_t j, const VecX& x) const {
    const auto& c = motions_[j];
    std::vector<MusculotendonUnit> units;
    for (int mi : c.group) units.push_back(split(mi, ratio_of(mi, x)));
    std::vector<double> tau;
    for (std::size_t s = 0; s < c.lengths.size(); ++s) {
      double t = 0.0;
      for (std::size_t g = 0; g < units.size(); ++g)
        t += fiber_equilibrium(units[g], model_.curves, c.lengths[s][g], cfg_.activation).force * c.arms[s][g];
      tau.push_back(t);
    }
    return refined_argmax(tau);
  }

  double motion_energy(std::size_t j, const VecX& x) const {
    const double d = motions_[j].reference_peak - peak(j, x).theta;
    return d * d;
  }

  double energy(const VecX& x) const {
    double e = 0.0;
    for (std::size_t j = 0; j < motions_.size(); ++j) e += motion_energy(j, x);
    return e;
  }

  /// Central differences that only re-evaluate the motions a ratio affects.
  VecX gradient(const VecX& x) const {
    VecX g = VecX::Zero(x.size());
    const VecX ref = reference_ratios();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double h = cfg_.fd_step * ref[k];
      VecX up = x, dn = x;
      up[k] += h;
      dn[k] -= h;
      double d = 0.0;
      for (int j : touches_[static_cast<std::size_t>(k)])
        d += motion_energy(static_cast<std::size_t>(j), up) - motion_energy(static_cast<std::size_t>(j), dn);
      g[k] = d / (2.0 * h);
    }
    return g;
  }

  Model apply(const VecX& x) const {
    Model m = model_;
    for (std::size_t k = 0; k < variables_.size(); ++k) {
      const int mi = variables_[k];
      m.muscles[static_cast<std::size_t>(mi)] = split(mi, x[static_cast<Eigen::Index>(k)]);
    }
    return m;
  }

private:
  struct MotionCache {
    std::string id;
    std::vector<int> group;
    double reference_peak = 0.0;
    std::vector<std::vector<double>> lengths;  // [sample][group member]
    std::vector<std::vector<double>> arms;
  };

  double ratio_of(int mi, const VecX& x) const {
    for (std::size_t k = 0; k < variables_.size(); ++k)
      if (variables_[k] == mi) return x[static_cast<Eigen::Index>(k)];
    return model_.muscles[static_cast<std::size_t>(mi)].ratio();
  }

  VecX bounds(double factor) const {
    VecX b(static_cast<Eigen::Index>(variables_.size()));
    for (std::size_t k = 0; k < variables_.size(); ++k)
      b[static_cast<Eigen::Index>(k)] = factor * reference_ratio_[static_cast<std::size_t>(variables_[k])];
    return b;
  }

  Model model_;
  RatioConfig cfg_;
  std::vector<MotionCache> motions_;
  std::vector<double> boundary_;
  std::vector<double> reference_ratio_;
  std::vector<int> variables_;
  std::vector<std::vector<int>> touches_;
};

/// Adjusts fiber/tendon ratios within the bound so each motion's angle of peak
/// torque approaches the reference, keeping every muscle's maximal length.
/// Projected gradient descent followed by a shrinking coordinate search; only
/// decreasing moves are taken.
inline RatioResult optimize_fiber_tendon_ratio(const Model& target, const Model& reference, const RatioConfig& cfg = {}) {
  if (!(cfg.bound >= 0.0 && cfg.bound < 1.0)) throw Error("optimize_fiber_tendon_ratio: bound must lie in [0, 1)");
  const PeakTorqueProblem p(target, reference, cfg);
  RatioResult r;
  VecX x = p.project(p.initial());
  double e = p.energy(x);
  r.trace.push_back(e);

  if (e > 0.0 && x.size() > 0) {
    DescentConfig dc;
    dc.max_iterations = cfg.max_iterations;
    dc.initial_step = 0.05 * p.reference_ratios().norm() / std::sqrt(static_cast<double>(x.size()));
    const auto gd = gradient_descent([&](const VecX& v) { return p.energy(v); }, x, dc,
                                     [&](const VecX& v) { return p.project(v); },
                                     [&](const VecX& v) { return p.gradient(v); });
    x = gd.x;
    r.iterations = gd.iterations;
    r.trace.insert(r.trace.end(), gd.trace.begin() + 1, gd.trace.end());
    e = r.trace.back();

    const VecX ref = p.reference_ratios();
    for (double step = cfg.pattern_step; step >= cfg.pattern_min_step && e > 0.0; step *= 0.5) {
      bool improved = true;
      while (improved && e > 0.0) {
        improved = false;
        for (Eigen::Index k = 0; k < x.size(); ++k)
          for (double sign : {1.0, -1.0}) {
            VecX y = x;
            y[k] += sign * step * ref[k];
            y = p.project(y);
            if (y[k] == x[k]) continue;
            const double ey = p.energy(y);
            if (ey < e) {
              x = y, e = ey, improved = true;
              r.trace.push_back(e);
              ++r.iterations;
            }
          }
      }
    }
  }

  const VecX x0 = p.project(p.initial());
  for (std::size_t j = 0; j < p.motion_count(); ++j) {
    const auto after = p.peak(j, x);
    r.peaks.push_back({p.motion_id(j), p.reference_peak(j), p.peak(j, x0).theta, after.theta, after.flat});
    if (after.flat) r.flagged.push_back(p.motion_id(j));
  }
  r.model = p.apply(x);
  return r;
}

}  // namespace msk
