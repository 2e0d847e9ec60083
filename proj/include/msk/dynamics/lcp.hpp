#pragma once

#include "msk/dynamics/jacobian.hpp"
#include "msk/dynamics/rigid_body.hpp"

#include <Eigen/LU>

namespace msk {

struct LcpResult {
  VecX f;  // f >= 0
  VecX v;  // v = A f + b >= 0
  double complementarity = 0.0;  // max_i |f_i v_i|
  double infeasibility = 0.0;    // max(-min f, -min v, 0)
  int sweeps = 0;
  bool converged = false;
};

inline LcpResult lcp_evaluate(const MatX& A, const VecX& b, VecX f) {
  LcpResult r;
  r.f = std::move(f);
  r.v = A * r.f + b;
  r.complementarity = r.f.size() ? r.f.cwiseProduct(r.v).cwiseAbs().maxCoeff() : 0.0;
  const double fmin = r.f.size() ? r.f.minCoeff() : 0.0;
  const double vmin = r.v.size() ? r.v.minCoeff() : 0.0;
  r.infeasibility = std::max({0.0, -fmin, -vmin});
  return r;
}

namespace detail {

/// Solves the LCP for a given guess of the positive-force set.
inline VecX lcp_for_set(const MatX& A, const VecX& b, const std::vector<bool>& active) {
  const Eigen::Index n = b.size();
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i)
    if (active[static_cast<std::size_t>(i)]) idx.push_back(i);
  VecX f = VecX::Zero(n);
  if (idx.empty()) return f;
  const auto k = static_cast<Eigen::Index>(idx.size());
  MatX Ass(k, k);
  VecX bs(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    bs[a] = -b[idx[a]];
    for (Eigen::Index c = 0; c < k; ++c) Ass(a, c) = A(idx[a], idx[c]);
  }
  const VecX fs = Ass.fullPivLu().solve(bs);
  for (Eigen::Index a = 0; a < k; ++a) f[idx[a]] = fs[a];
  return f;
}

}  // namespace detail

/// Finds f >= 0 with v = A f + b >= 0 and f'v = 0. Projected Gauss-Seidel, then
/// a least-index principal-pivoting polish seeded with the PGS support.
inline LcpResult solve_lcp(const MatX& A, const VecX& b, int sweeps = 200, double tol = 1e-9) {
  const Eigen::Index n = b.size();
  if (A.rows() != n || A.cols() != n) throw Error("solve_lcp: dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(A(i, i) > 0.0)) throw Error("solve_lcp: non-positive diagonal entry");

  VecX f = VecX::Zero(n);
  int s = 0;
  for (; s < sweeps; ++s) {
    double change = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double vi = A.row(i).dot(f) + b[i];
      const double fi = std::max(0.0, f[i] - vi / A(i, i));
      change = std::max(change, std::abs(fi - f[i]));
      f[i] = fi;
    }
    if (change < 1e-14) break;
  }

  auto solution = lcp_evaluate(A, b, f);
  solution.sweeps = s;
  if (solution.complementarity > tol || solution.infeasibility > tol) {
    std::vector<bool> active(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) active[static_cast<std::size_t>(i)] = f[i] > 0.0;
    const int cap = 50 * static_cast<int>(n) + 50;
    for (int it = 0; it < cap; ++it) {
      const VecX fp = detail::lcp_for_set(A, b, active);
      const VecX vp = A * fp + b;
      Eigen::Index flip = -1;
      for (Eigen::Index i = 0; i < n && flip < 0; ++i) {
        const bool in = active[static_cast<std::size_t>(i)];
        if ((in && fp[i] < -tol) || (!in && vp[i] < -tol)) flip = i;
      }
      if (flip < 0) {
        auto polished = lcp_evaluate(A, b, fp.cwiseMax(0.0));
        polished.sweeps = s;
        if (polished.complementarity + polished.infeasibility <= solution.complementarity + solution.infeasibility)
          solution = polished;
        break;
      }
      active[static_cast<std::size_t>(flip)] = !active[static_cast<std::size_t>(flip)];
    }
  }
  solution.converged = solution.complementarity <= 1e-6 && solution.infeasibility <= 1e-6;
  return solution;
}

/// Joint-limit rows and their solved forces. Rows are muscles whose passive
/// constraint C_i sits within `proximity` of zero.
struct ConstraintSet {
  std::vector<int> muscles;  // model muscle index per row
  MatX J;                    // rows: dC_i/dq
  VecX gap;                  // C_i
  VecX f;                    // f_c >= 0
  VecX v;                    // v_c = J qd+ >= 0
  VecX generalized_force;    // J^T f_c
  double complementarity = 0.0;
  double infeasibility = 0.0;
  bool converged = true;

  bool empty() const { return muscles.empty(); }
};

/// d l_m / d l_mt of the passive equilibrium (finite difference).
inline double passive_fiber_slope(const MusculotendonUnit& m, const CurveSet& curves, double l_mt, double h = 1e-7) {
  const double up = fiber_equilibrium(m, curves, l_mt + h, 0.0).fiber_length;
  const double dn = fiber_equilibrium(m, curves, l_mt - h, 0.0).fiber_length;
  return (up - dn) / (2.0 * h);
}

/// Velocity-level joint-limit impulses over one step `dt` under the generalized
/// force `candidate` (muscle + external torques, bias excluded).
inline ConstraintSet solve_joint_limit_lcp(const Model& model, const DynamicsState& state, const VecX& candidate,
                                           double dt = 1e-3, double proximity = 1e-3) {
  const Skeleton& skel = model.skeleton;
  validate_state(skel, state);
  const int n = skel.dof_count();
  if (candidate.size() != n) throw Error("solve_joint_limit_lcp: candidate force dimension mismatch");
  if (!(dt > 0.0)) throw Error("solve_joint_limit_lcp: dt must be positive");
  const auto world = world_transforms(skel, state.pose);

  ConstraintSet cs;
  std::vector<VecX> rows;
  std::vector<double> gaps;
  for (std::size_t i = 0; i < model.muscles.size(); ++i) {
    const auto& m = model.muscles[i];
    const double l_mt = musculotendon_length(m, world);
    const double c = m.k_m * m.l_m0 - fiber_equilibrium(m, model.curves, l_mt, 0.0).fiber_length;
    if (std::abs(c) >= proximity) continue;
    cs.muscles.push_back(static_cast<int>(i));
    gaps.push_back(c);
    rows.push_back(passive_fiber_slope(m, model.curves, l_mt) * muscle_jacobian(m, skel, world));
  }
  const auto k = static_cast<Eigen::Index>(rows.size());
  cs.J = MatX::Zero(k, n);
  cs.gap = VecX::Zero(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    cs.J.row(r) = rows[static_cast<std::size_t>(r)].transpose();
    cs.gap[r] = gaps[static_cast<std::size_t>(r)];
  }
  cs.generalized_force = VecX::Zero(n);
  if (k == 0) {
    cs.f = cs.v = VecX::Zero(0);
    return cs;
  }

  const MatX M = mass_matrix(model, state.pose);
  const Eigen::LLT<MatX> llt(M);
  VecX rhs = candidate - bias_forces(model, state);
  if (state.external.size() == n) rhs += state.external;
  const VecX qd_free = state.velocity + dt * llt.solve(rhs);
  MatX A = dt * cs.J * llt.solve(cs.J.transpose());
  A = 0.5 * (A + A.transpose());
  A.diagonal().array() += 1e-12 * std::max(1.0, A.diagonal().maxCoeff());
  const VecX b = cs.J * qd_free;
  const auto sol = solve_lcp(A, b);
  cs.f = sol.f;
  cs.v = sol.v;
  cs.complementarity = sol.complementarity;
  cs.infeasibility = sol.infeasibility;
  cs.converged = sol.converged;
  cs.generalized_force = cs.J.transpose() * cs.f;
  return cs;
}

}  // namespace msk
