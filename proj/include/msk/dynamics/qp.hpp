#pragma once

#include "msk/dynamics/jacobian.hpp"
#include "msk/dynamics/rigid_body.hpp"

#include <Eigen/Cholesky>

#include <optional>

namespace msk {

struct ActivationVector {
  VecX a;

  explicit ActivationVector(VecX values = {}) : a(std::move(values)) {
    for (Eigen::Index i = 0; i < a.size(); ++i)
      if (!(a[i] >= 0.0 && a[i] <= 1.0)) throw Error("activation " + std::to_string(i) + " outside [0, 1]");
  }
  static ActivationVector zeros(int n) { return ActivationVector(VecX::Zero(n)); }
  int size() const { return static_cast<int>(a.size()); }
  double operator[](int i) const { return a[i]; }
  std::span<const double> span() const { return {a.data(), static_cast<std::size_t>(a.size())}; }
};

struct BoxQpResult {
  VecX x;
  double objective = 0.0;
  double kkt_residual = 0.0;  // || x - clamp(x - grad) ||_inf
  int iterations = 0;
  bool converged = false;
};

inline double box_qp_objective(const MatX& H, const VecX& g, const VecX& x) { return 0.5 * x.dot(H * x) + g.dot(x); }

inline double box_kkt_residual(const MatX& H, const VecX& g, const VecX& x, const VecX& lo, const VecX& hi) {
  const VecX grad = H * x + g;
  return (x - (x - grad).cwiseMax(lo).cwiseMin(hi)).lpNorm<Eigen::Infinity>();
}

/// min 0.5 x'Hx + g'x  s.t. lo <= x <= hi, H symmetric positive-definite.
/// Primal active-set method started from the projection of `x0`.
inline BoxQpResult solve_box_qp(const MatX& H, const VecX& g, const VecX& lo, const VecX& hi,
                                std::optional<VecX> x0 = std::nullopt, double tol = 1e-10) {
  const Eigen::Index n = g.size();
  if (H.rows() != n || H.cols() != n || lo.size() != n || hi.size() != n) throw Error("solve_box_qp: dimension mismatch");
  if ((lo.array() > hi.array()).any()) throw Error("solve_box_qp: empty box");
  BoxQpResult r;
  r.x = (x0 ? *x0 : VecX::Zero(n)).cwiseMax(lo).cwiseMin(hi);
  // 0 free, -1 at lower, +1 at upper
  std::vector<int> state(static_cast<std::size_t>(n), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r.x[i] <= lo[i]) state[static_cast<std::size_t>(i)] = -1;
    else if (r.x[i] >= hi[i]) state[static_cast<std::size_t>(i)] = 1;
  }

  const int max_iter = 20 * static_cast<int>(n) + 100;
  for (r.iterations = 0; r.iterations < max_iter; ++r.iterations) {
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < n; ++i)
      if (state[static_cast<std::size_t>(i)] == 0) free.push_back(i);
    const auto nf = static_cast<Eigen::Index>(free.size());

    // Minimizer over the free subspace with the bound variables fixed.
    VecX target = r.x;
    if (nf > 0) {
      MatX Hff(nf, nf);
      VecX rhs(nf);
      for (Eigen::Index a = 0; a < nf; ++a) {
        rhs[a] = -g[free[a]];
        for (Eigen::Index j = 0; j < n; ++j)
          if (state[static_cast<std::size_t>(j)] != 0) rhs[a] -= H(free[a], j) * r.x[j];
        for (Eigen::Index b = 0; b < nf; ++b) Hff(a, b) = H(free[a], free[b]);
      }
      const VecX xf = Hff.ldlt().solve(rhs);
      for (Eigen::Index a = 0; a < nf; ++a) target[free[a]] = xf[a];
    }

    // Ratio test toward the subspace minimizer.
    double step = 1.0;
    Eigen::Index blocking = -1;
    int blocking_side = 0;
    for (Eigen::Index a = 0; a < nf; ++a) {
      const Eigen::Index i = free[a];
      const double d = target[i] - r.x[i];
      if (d < 0.0 && target[i] < lo[i]) {
        const double s = (lo[i] - r.x[i]) / d;
        if (s < step) step = s, blocking = i, blocking_side = -1;
      } else if (d > 0.0 && target[i] > hi[i]) {
        const double s = (hi[i] - r.x[i]) / d;
        if (s < step) step = s, blocking = i, blocking_side = 1;
      }
    }
    r.x += std::max(step, 0.0) * (target - r.x);
    if (blocking >= 0) {
      r.x[blocking] = blocking_side < 0 ? lo[blocking] : hi[blocking];
      state[static_cast<std::size_t>(blocking)] = blocking_side;
      continue;
    }

    // Release the bound whose multiplier has the wrong sign.
    const VecX grad = H * r.x + g;
    Eigen::Index release = -1;
    double worst = tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int s = state[static_cast<std::size_t>(i)];
      const double v = s < 0 ? -grad[i] : s > 0 ? grad[i] : 0.0;
      if (v > worst) worst = v, release = i;
    }
    if (release < 0) {
      r.converged = true;
      break;
    }
    state[static_cast<std::size_t>(release)] = 0;
  }
  r.x = r.x.cwiseMax(lo).cwiseMin(hi);
  r.objective = box_qp_objective(H, g, r.x);
  r.kkt_residual = box_kkt_residual(H, g, r.x, lo, hi);
  return r;
}

/// Tension of a muscle made affine in activation: f(a) = passive + a * active.
struct LinearizedTension {
  double passive = 0.0;
  double active = 0.0;
};

/// Linearization at the passive fiber equilibrium for the current length.
inline LinearizedTension linearize_tension(const MusculotendonUnit& m, const CurveSet& curves, double l_mt) {
  const auto fs = fiber_equilibrium(m, curves, l_mt, 0.0);
  LinearizedTension t;
  t.passive = fs.force;
  t.active = m.f_max * curves.active(fs.fiber_length / m.l_m0, 1.0) * std::cos(m.pennation);
  return t;
}

struct MuscleQpResult {
  ActivationVector activation;
  VecX qdd;                 // achieved acceleration
  VecX qdd_passive;         // acceleration at a = 0
  double tracking_error = 0.0;  // || qdd_d - qdd ||
  double objective = 0.0;       // ||qdd_d - qdd||^2 + w_reg ||a||^2
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct MuscleQpProblem {
  MatX A;   // columns: acceleration per unit activation
  VecX b;   // qdd_d - qdd_passive
  VecX qdd_passive;
};

/// Builds the affine map qdd(a) = qdd_passive + A a from the equation of motion.
/// `constraint_torque` (e.g. J_c^T f_c from a prior limit solve) is held fixed.
inline MuscleQpProblem build_muscle_qp(const Model& model, const DynamicsState& state, const VecX& qdd_desired,
                                       const VecX* constraint_torque = nullptr) {
  const Skeleton& skel = model.skeleton;
  validate_state(skel, state);
  const int n = skel.dof_count();
  if (qdd_desired.size() != n) throw Error("solve_muscle_qp: desired acceleration dimension mismatch");
  const MatX M = mass_matrix(model, state.pose);
  const Eigen::LLT<MatX> llt(M);
  if (llt.info() != Eigen::Success) throw Error("solve_muscle_qp: mass matrix is not positive-definite");
  const auto world = world_transforms(skel, state.pose);

  VecX rhs = -bias_forces(model, state);
  if (state.external.size() == n) rhs += state.external;
  if (constraint_torque) rhs += *constraint_torque;
  MatX cols(n, static_cast<Eigen::Index>(model.muscles.size()));
  for (std::size_t i = 0; i < model.muscles.size(); ++i) {
    const auto& m = model.muscles[i];
    const VecX j = muscle_jacobian(m, skel, world);
    const auto t = linearize_tension(m, model.curves, musculotendon_length(m, world));
    rhs += j * t.passive;
    cols.col(static_cast<Eigen::Index>(i)) = j * t.active;
  }
  MuscleQpProblem p;
  p.qdd_passive = llt.solve(rhs);
  p.A = llt.solve(cols);
  p.b = qdd_desired - p.qdd_passive;
  return p;
}

/// min_a ||qdd_d - qdd(a)||^2 + w_reg ||a||^2  s.t. 0 <= a <= 1.
inline MuscleQpResult solve_muscle_qp(const Model& model, const DynamicsState& state, const VecX& qdd_desired,
                                      double w_reg = 0.01, const VecX* constraint_torque = nullptr) {
  if (!(w_reg >= 0.0)) throw Error("solve_muscle_qp: w_reg must be non-negative");
  const auto p = build_muscle_qp(model, state, qdd_desired, constraint_torque);
  const Eigen::Index k = p.A.cols();
  MatX H = p.A.transpose() * p.A;
  H.diagonal().array() += w_reg;
  const VecX g = -p.A.transpose() * p.b;
  const auto qp = solve_box_qp(H, g, VecX::Zero(k), VecX::Ones(k));

  MuscleQpResult r{ActivationVector(qp.x), p.qdd_passive + p.A * qp.x, p.qdd_passive};
  r.tracking_error = (qdd_desired - r.qdd).norm();
  r.objective = r.tracking_error * r.tracking_error + w_reg * qp.x.squaredNorm();
  r.kkt_residual = qp.kkt_residual;
  r.iterations = qp.iterations;
  r.converged = qp.converged;
  return r;
}

}  // namespace msk
