#pragma once

#include "msk/core/curves.hpp"
#include "msk/core/skeleton.hpp"

#include <boost/math/tools/roots.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace msk {

/// One linear-blend-skinning influence of a waypoint.
struct SkinEntry {
  int bone = 0;  // index into Skeleton::bones()
  double weight = 1.0;
  Vec3 local = Vec3::Zero();  // coordinates in the bone frame

  bool operator==(const SkinEntry&) const = default;
};

struct Waypoint {
  std::vector<SkinEntry> skin;

  bool operator==(const Waypoint&) const = default;
};

struct MusculotendonUnit {
  std::string id;
  std::vector<Waypoint> waypoints;  // origin first, insertion last
  double l_m0 = 0.1;                // optimal fiber length (m)
  double l_t0 = 0.1;                // tendon slack length (m)
  double pennation = 0.0;           // constant pennation angle (rad)
  double f_max = 1000.0;            // maximum isometric force (N)
  double k_m = 1.6;                 // maximal fiber extension ratio
  double k_t = 1.03;                // maximal tendon extension ratio
  std::vector<std::string> motions; // ids of joint motions this muscle participates in

  double ratio() const { return l_t0 / l_m0; }
};

/// Skinned waypoint position p = sum_j w_j T_j x_j.
inline Vec3 waypoint_position(const Waypoint& wp, std::span<const Transform> world) {
  Vec3 p = Vec3::Zero();
  for (const auto& s : wp.skin) p += s.weight * (world[static_cast<std::size_t>(s.bone)] * s.local);
  return p;
}

inline Vec3 waypoint_position(const Waypoint& wp, const Skeleton& skel, const Pose& pose) {
  const auto world = world_transforms(skel, pose);
  return waypoint_position(wp, world);
}

inline std::vector<Vec3> waypoint_positions(const MusculotendonUnit& m, std::span<const Transform> world) {
  std::vector<Vec3> pts;
  pts.reserve(m.waypoints.size());
  for (const auto& wp : m.waypoints) pts.push_back(waypoint_position(wp, world));
  return pts;
}

/// Polyline length through the waypoints.
inline double musculotendon_length(const MusculotendonUnit& m, std::span<const Transform> world) {
  double len = 0.0;
  Vec3 prev = waypoint_position(m.waypoints.front(), world);
  for (std::size_t k = 1; k < m.waypoints.size(); ++k) {
    const Vec3 p = waypoint_position(m.waypoints[k], world);
    len += (p - prev).norm();
    prev = p;
  }
  return len;
}

inline double musculotendon_length(const MusculotendonUnit& m, const Skeleton& skel, const Pose& pose) {
  const auto world = world_transforms(skel, pose);
  return musculotendon_length(m, world);
}

/// Maximal musculotendon length k_m l_m0 + k_t l_t0.
inline double max_musculotendon_length(const MusculotendonUnit& m) { return m.k_m * m.l_m0 + m.k_t * m.l_t0; }

/// Normalized tendon length reached when the passive fiber sits at k_m l_m0.
/// Equals k_t when the curves are consistent with the unit's k_t (the default).
inline double boundary_tendon_stretch(const MusculotendonUnit& m, const CurveSet& curves) {
  return curves.tendon_length_for_force(curves.passive(m.k_m) * std::cos(m.pennation));
}

/// Musculotendon length at which the passive fiber reaches k_m l_m0, i.e. where
/// the passive constraint C_i crosses zero. Monotone in l_mt at zero activation.
inline double passive_boundary_length(const MusculotendonUnit& m, const CurveSet& curves) {
  return m.k_m * m.l_m0 * std::cos(m.pennation) + m.l_t0 * boundary_tendon_stretch(m, curves);
}

struct FiberState {
  double fiber_length = 0.0;
  double tendon_length = 0.0;
  double force = 0.0;     // tendon tension (N)
  double residual = 0.0;  // |force imbalance| in units of f_max
  int iterations = 0;
  bool converged = true;
  bool clamped = false;  // fiber could not reach equilibrium inside its physical range
};

/// Smallest admissible normalized fiber length.
inline constexpr double kMinNormalizedFiber = 0.05;
inline constexpr std::uintmax_t kEquilibriumMaxIterations = 200;

/// Quasi-static tension balance of the contractile, parallel and series elements
/// at musculotendon length `l_mt` and activation `a`.
inline FiberState fiber_equilibrium(const MusculotendonUnit& m, const CurveSet& curves, double l_mt, double a) {
  FiberState s;
  const double cos_p = std::cos(m.pennation);
  auto fiber_force = [&](double l_m) {
    const double n = l_m / m.l_m0;
    return (curves.active(n, a) + curves.passive(n)) * cos_p;
  };

  if (m.l_t0 <= 0.0) {
    s.fiber_length = std::max(l_mt, 0.0) / cos_p;
    s.tendon_length = 0.0;
    s.force = fiber_force(s.fiber_length) * m.f_max;
    return s;
  }

  auto residual = [&](double l_m) {
    return fiber_force(l_m) - curves.tendon((l_mt - l_m * cos_p) / m.l_t0);
  };
  // Fiber length with the tendon exactly at slack length.
  const double slack_fiber = (l_mt - m.l_t0) / cos_p;
  const double lower = kMinNormalizedFiber * m.l_m0;

  auto finish = [&](double l_m) {
    s.fiber_length = l_m;
    s.tendon_length = l_mt - l_m * cos_p;
    s.force = curves.tendon(s.tendon_length / m.l_t0) * m.f_max;
    s.residual = std::abs(residual(l_m));
    return s;
  };

  if (a <= 0.0 && slack_fiber <= m.l_m0) {
    // Both passive elements unloaded: tendon at slack, fiber takes the rest.
    if (slack_fiber < 0.0) {
      s.clamped = true;
      s.fiber_length = 0.0;
      s.tendon_length = l_mt;
      return s;
    }
    return finish(slack_fiber);
  }
  if (slack_fiber <= lower) {
    s.clamped = true;
    return finish(std::max(slack_fiber, 0.0));
  }

  double lo = (a <= 0.0) ? m.l_m0 : lower;
  const double hi = slack_fiber;
  const double g_lo = residual(lo);
  if (g_lo >= 0.0) {
    // Tendon cannot balance the fiber even fully shortened.
    s.clamped = true;
    return finish(lo);
  }
  const double g_hi = residual(hi);
  if (g_hi <= 0.0) return finish(hi);

  std::uintmax_t iters = kEquilibriumMaxIterations;
  const auto bracket = boost::math::tools::toms748_solve(residual, lo, hi, g_lo, g_hi,
                                                         boost::math::tools::eps_tolerance<double>(52), iters);
  s.iterations = static_cast<int>(iters);
  s.converged = iters < kEquilibriumMaxIterations;
  // Pick the bracket end with the smaller imbalance.
  const double l_m = std::abs(residual(bracket.first)) <= std::abs(residual(bracket.second)) ? bracket.first
                                                                                               : bracket.second;
  return finish(l_m);
}

}  // namespace msk
