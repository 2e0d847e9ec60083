#pragma once

#include "msk/retarget/curves.hpp"
#include "msk/retarget/optimizer.hpp"

namespace msk {

struct WaypointConfig {
  double w_l = 10.0;
  double w_delta = 50.0;
  int quadrature = 21;     // trapezoid nodes per motion for the direction term
  int curve_samples = 41;  // samples per motion for the length characteristics
  bool optimize_weights = false;
  DescentConfig descent{.max_iterations = 2000, .fd_step = 1e-4};
};

/// Sum over motions of (theta_max - theta_max')^2 + (theta_min - theta_min')^2 + w_delta (delta - delta')^2.
inline double length_energy(std::span<const CurveCharacteristics> reference, std::span<const CurveCharacteristics> target,
                            double w_delta = 50.0) {
  if (reference.size() != target.size()) throw Error("length_energy: motion counts differ");
  double e = 0.0;
  for (std::size_t j = 0; j < reference.size(); ++j) {
    const double a = reference[j].theta_max - target[j].theta_max;
    const double b = reference[j].theta_min - target[j].theta_min;
    const double d = reference[j].delta - target[j].delta;
    e += a * a + b * b + w_delta * d * d;
  }
  return e;
}

namespace detail {

/// Force direction at each waypoint: the outgoing segment, or the incoming one
/// at the insertion. Zero vectors mark degenerate segments.
inline std::vector<Vec3> waypoint_directions(const std::vector<Vec3>& pts) {
  std::vector<Vec3> dirs(pts.size(), Vec3::Zero());
  if (pts.size() < 2) return dirs;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const std::size_t s = std::min(k, pts.size() - 2);
    const Vec3 d = pts[s + 1] - pts[s];
    const double n = d.norm();
    if (n > 1e-12) dirs[k] = d / n;
  }
  return dirs;
}

inline double trapezoid_weight(int i, int n) {
  const double h = 1.0 / (n - 1);
  return (i == 0 || i == n - 1) ? 0.5 * h : h;
}

}  // namespace detail

/// Precomputed reference data and target transforms for one muscle, so that
/// energies can be evaluated for many candidate waypoint sets.
class WaypointProblem {
public:
  WaypointProblem(const Model& reference, const Model& target, int muscle, const WaypointConfig& cfg)
      : cfg_(cfg), base_(target.muscles.at(static_cast<std::size_t>(muscle))) {
    const auto& mref = reference.muscle(base_.id);
    if (mref.waypoints.size() != base_.waypoints.size())
      throw Error("waypoint energy: muscle '" + base_.id + "' waypoint counts differ");
    if (cfg.quadrature < 2) throw Error("waypoint energy: quadrature needs at least 2 nodes");
    for (const auto& mo : base_.motions) {
      MotionData d;
      const auto& ref_motion = reference.motion(mo);
      const auto& tgt_motion = target.motion(mo);
      for (const auto& p : motion_sweep(reference, ref_motion, cfg.quadrature))
        d.ref_dirs.push_back(detail::waypoint_directions(waypoint_positions(mref, world_transforms(reference.skeleton, p))));
      for (const auto& p : motion_sweep(target, tgt_motion, cfg.quadrature))
        d.quad_world.push_back(world_transforms(target.skeleton, p));
      for (const auto& p : motion_sweep(target, tgt_motion, cfg.curve_samples))
        d.curve_world.push_back(world_transforms(target.skeleton, p));
      d.ref_chars = length_angle_curve(reference, mref, ref_motion, cfg.curve_samples).characteristics;
      motions_.push_back(std::move(d));
    }
  }

  const MusculotendonUnit& muscle() const { return base_; }
  std::size_t skipped_segments() const { return skipped_; }

  double direction_energy(const MusculotendonUnit& m) const {
    double e = 0.0;
    for (const auto& d : motions_) {
      const int n = static_cast<int>(d.quad_world.size());
      for (int i = 0; i < n; ++i) {
        const auto dirs = detail::waypoint_directions(waypoint_positions(m, d.quad_world[static_cast<std::size_t>(i)]));
        const auto& ref = d.ref_dirs[static_cast<std::size_t>(i)];
        const double w = detail::trapezoid_weight(i, n);
        for (std::size_t k = 0; k < dirs.size(); ++k) {
          if (dirs[k].isZero(0.0) || ref[k].isZero(0.0)) {
            ++skipped_;
            continue;
          }
          e += w * dirs[k].cross(ref[k]).squaredNorm();
        }
      }
    }
    return e;
  }

  std::vector<CurveCharacteristics> characteristics(const MusculotendonUnit& m) const {
    std::vector<CurveCharacteristics> out;
    for (const auto& d : motions_) {
      std::vector<double> len;
      len.reserve(d.curve_world.size());
      for (const auto& w : d.curve_world) len.push_back(musculotendon_length(m, w));
      out.push_back(characterize(len));
    }
    return out;
  }

  std::vector<CurveCharacteristics> reference_characteristics() const {
    std::vector<CurveCharacteristics> out;
    for (const auto& d : motions_) out.push_back(d.ref_chars);
    return out;
  }

  double length_energy(const MusculotendonUnit& m) const {
    return msk::length_energy(reference_characteristics(), characteristics(m), cfg_.w_delta);
  }

  double energy(const MusculotendonUnit& m) const { return direction_energy(m) + cfg_.w_l * length_energy(m); }

  /// Packs local coordinates (and, when enabled, weights of blended waypoints).
  VecX pack(const MusculotendonUnit& m) const {
    std::vector<double> v;
    for (const auto& wp : m.waypoints)
      for (const auto& s : wp.skin) v.insert(v.end(), {s.local.x(), s.local.y(), s.local.z()});
    if (cfg_.optimize_weights)
      for (const auto& wp : m.waypoints)
        if (wp.skin.size() > 1)
          for (const auto& s : wp.skin) v.push_back(s.weight);
    return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  MusculotendonUnit unpack(const VecX& x) const {
    MusculotendonUnit m = base_;
    Eigen::Index i = 0;
    for (auto& wp : m.waypoints)
      for (auto& s : wp.skin) {
        s.local = x.segment<3>(i);
        i += 3;
      }
    if (cfg_.optimize_weights)
      for (auto& wp : m.waypoints)
        if (wp.skin.size() > 1)
          for (auto& s : wp.skin) s.weight = x[i++];
    return m;
  }

  /// Keeps blended weights on the simplex.
  VecX project(const VecX& x) const {
    if (!cfg_.optimize_weights) return x;
    VecX y = x;
    Eigen::Index i = 0;
    for (const auto& wp : base_.waypoints) i += 3 * static_cast<Eigen::Index>(wp.skin.size());
    for (const auto& wp : base_.waypoints) {
      if (wp.skin.size() < 2) continue;
      const auto n = static_cast<Eigen::Index>(wp.skin.size());
      y.segment(i, n) = project_simplex(x.segment(i, n));
      i += n;
    }
    return y;
  }

private:
  struct MotionData {
    std::vector<std::vector<Vec3>> ref_dirs;
    std::vector<std::vector<Transform>> quad_world;
    std::vector<std::vector<Transform>> curve_world;
    CurveCharacteristics ref_chars;
  };
  WaypointConfig cfg_;
  MusculotendonUnit base_;
  std::vector<MotionData> motions_;
  mutable std::size_t skipped_ = 0;
};

/// Direction term for one muscle of `target` against the same-id muscle of `reference`.
inline double direction_energy(const Model& reference, const Model& target, std::string_view muscle,
                               int quadrature = 21) {
  WaypointConfig cfg;
  cfg.quadrature = quadrature;
  const WaypointProblem p(reference, target, target.muscle_index(muscle), cfg);
  return p.direction_energy(p.muscle());
}

struct MuscleOptimization {
  std::string muscle;
  std::vector<double> trace;
  int iterations = 0;
  bool converged = true;
  std::vector<CurveCharacteristics> before, after, reference;
};

struct WaypointResult {
  Model model;
  std::vector<MuscleOptimization> muscles;
};

/// Minimizes E_direction + w_l E_length per muscle over its waypoint coordinates.
inline WaypointResult optimize_waypoints(Model target, const Model& reference, const WaypointConfig& cfg = {},
                                         const std::function<void(double)>& progress = {}) {
  WaypointResult out;
  const std::size_t n = target.muscles.size();
  for (std::size_t i = 0; i < n; ++i) {
    auto& m = target.muscles[i];
    MuscleOptimization mo;
    mo.muscle = m.id;
    if (!m.motions.empty()) {
      const WaypointProblem problem(reference, target, static_cast<int>(i), cfg);
      mo.reference = problem.reference_characteristics();
      mo.before = problem.characteristics(m);
      const auto res = gradient_descent([&](const VecX& x) { return problem.energy(problem.unpack(x)); },
                                        problem.pack(m), cfg.descent,
                                        [&](const VecX& x) { return problem.project(x); });
      m = problem.unpack(res.x);
      mo.after = problem.characteristics(m);
      mo.trace = res.trace;
      mo.iterations = res.iterations;
      mo.converged = res.converged;
    }
    out.muscles.push_back(std::move(mo));
    if (progress) progress(static_cast<double>(i + 1) / static_cast<double>(n));
  }
  out.model = std::move(target);
  return out;
}

}  // namespace msk
