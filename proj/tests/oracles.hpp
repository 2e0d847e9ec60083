#pragma once

#include "msk/core/muscle.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using msk::MatX;
using msk::VecX;

/// Plain bisection on the fiber/tendon tension balance.
struct HillSolution {
  double fiber_length = 0.0;
  double force = 0.0;
  bool bracketed = false;
};

inline HillSolution hill_bisection(const msk::MusculotendonUnit& m, const msk::CurveSet& c, double l_mt, double a) {
  const double cp = std::cos(m.pennation);
  auto g = [&](double l_m) {
    const double n = l_m / m.l_m0;
    return (c.active(n, a) + c.passive(n)) * cp - c.tendon((l_mt - l_m * cp) / m.l_t0);
  };
  HillSolution s;
  double lo = 0.05 * m.l_m0;
  double hi = (l_mt - m.l_t0) / cp;
  if (a <= 0.0) lo = m.l_m0;
  if (!(hi > lo)) return s;
  if (!(g(lo) < 0.0) || !(g(hi) > 0.0)) return s;
  for (int i = 0; i < 400 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  s.fiber_length = std::abs(g(lo)) <= std::abs(g(hi)) ? lo : hi;
  s.force = c.tendon((l_mt - s.fiber_length * cp) / m.l_t0) * m.f_max;
  s.bracketed = true;
  return s;
}

/// LCP solution by enumerating every support set; empty when none satisfies
/// the sign conditions to `tol`.
inline std::optional<VecX> lcp_enumerate(const MatX& A, const VecX& b, double tol = 1e-10) {
  const auto n = static_cast<int>(b.size());
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) s.push_back(i);
    VecX f = VecX::Zero(n);
    if (!s.empty()) {
      const auto k = static_cast<Eigen::Index>(s.size());
      MatX As(k, k);
      VecX bs(k);
      for (Eigen::Index r = 0; r < k; ++r) {
        bs[r] = -b[s[r]];
        for (Eigen::Index c = 0; c < k; ++c) As(r, c) = A(s[r], s[c]);
      }
      const VecX fs = As.colPivHouseholderQr().solve(bs);
      for (Eigen::Index r = 0; r < k; ++r) f[s[r]] = fs[r];
    }
    const VecX v = A * f + b;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) ok = f[i] >= -tol && v[i] >= -tol;
    if (ok) return f;
  }
  return std::nullopt;
}

/// Box-QP minimizer by enumerating every free/lower/upper assignment.
inline VecX box_qp_enumerate(const MatX& H, const VecX& g, const VecX& lo, const VecX& hi) {
  const auto n = static_cast<int>(g.size());
  int total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  VecX best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (int code = 0; code < total; ++code) {
    VecX x = VecX::Zero(n);
    std::vector<int> free;
    int c = code;
    for (int i = 0; i < n; ++i, c /= 3) {
      if (c % 3 == 0) free.push_back(i);
      else x[i] = c % 3 == 1 ? lo[i] : hi[i];
    }
    if (!free.empty()) {
      const auto k = static_cast<Eigen::Index>(free.size());
      MatX Hf(k, k);
      VecX rhs(k);
      for (Eigen::Index r = 0; r < k; ++r) {
        rhs[r] = -g[free[r]];
        for (int j = 0; j < n; ++j)
          if (std::find(free.begin(), free.end(), j) == free.end()) rhs[r] -= H(free[r], j) * x[j];
        for (Eigen::Index q = 0; q < k; ++q) Hf(r, q) = H(free[r], free[q]);
      }
      const VecX xf = Hf.llt().solve(rhs);
      for (Eigen::Index r = 0; r < k; ++r) x[free[r]] = xf[r];
    }
    if (((x - lo).array() < -1e-12).any() || ((hi - x).array() < -1e-12).any()) continue;
    const double obj = 0.5 * x.dot(H * x) + g.dot(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

/// Pose with every ball joint rotated by up to `spread` rad about a random axis.
inline msk::Pose random_pose(const msk::Skeleton& skel, std::mt19937_64& rng, double spread = 0.8) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto vec = [&] { return msk::Vec3(U(rng), U(rng), U(rng)); };
  msk::Pose p = skel.rest_pose();
  p.root_rotation = msk::quat_exp(vec());
  p.root_translation = vec();
  for (int i = 0; i < skel.size(); ++i) {
    auto& c = p.joints[static_cast<std::size_t>(i)];
    switch (skel.bone(i).joint_type) {
      case msk::JointType::ball_and_socket: c.rotation = msk::quat_exp(spread / std::sqrt(3.0) * vec()); break;
      case msk::JointType::revolute: c.angle = spread * U(rng); break;
      case msk::JointType::free_root: break;
    }
  }
  return p;
}

inline bool non_increasing(const std::vector<double>& t) {
  for (std::size_t i = 1; i < t.size(); ++i)
    if (t[i] > t[i - 1]) return false;
  return true;
}

}  // namespace oracle
