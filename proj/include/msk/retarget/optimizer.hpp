#pragma once

#include "msk/core/math.hpp"

#include <algorithm>
#include <functional>
#include <vector>

namespace msk {

struct DescentConfig {
  int max_iterations = 100;
  double fd_step = 1e-4;
  double armijo = 1e-4;
  double shrink = 0.5;
  double initial_step = 1e-2;  // length of the first trial step
  double min_step = 1e-12;     // line search gives up below this step length
  double grad_tol = 1e-10;
  double energy_tol = 1e-14;   // energies at or below this are treated as optimal
  double rel_tol = 1e-10;      // stop when the relative decrease falls below this
  bool barzilai_borwein = true;
  double max_step = 1.0;       // cap on the Barzilai-Borwein trial step length
};

struct DescentResult {
  VecX x;
  std::vector<double> trace;  // energy before the first step and after every accepted step
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

using Objective = std::function<double(const VecX&)>;
using Projection = std::function<VecX(const VecX&)>;
using Gradient = std::function<VecX(const VecX&)>;

/// Central-difference gradient.
inline VecX fd_gradient(const Objective& f, const VecX& x, double h) {
  VecX g(x.size());
  VecX y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y[i] = x[i] + h;
    const double up = f(y);
    y[i] = x[i] - h;
    const double dn = f(y);
    y[i] = x[i];
    g[i] = (up - dn) / (2.0 * h);
  }
  return g;
}

/// Projected gradient descent with Armijo backtracking along the negative
/// gradient. The first trial step is the Barzilai-Borwein length from the last
/// accepted step. The gradient is a central difference unless one is
/// supplied. Only decreasing steps are accepted, so the trace is monotone.
inline DescentResult gradient_descent(const Objective& f, VecX x0, const DescentConfig& cfg = {},
                                      const Projection& project = {}, const Gradient& gradient = {}) {
  DescentResult r;
  r.x = project ? project(x0) : std::move(x0);
  double e = f(r.x);
  r.trace.push_back(e);
  if (e <= cfg.energy_tol) {
    r.converged = true;
    return r;
  }
  double step_len = cfg.initial_step;
  VecX g_prev, s_prev;
  for (r.iterations = 0; r.iterations < cfg.max_iterations;) {
    const VecX g = gradient ? gradient(r.x) : fd_gradient(f, r.x, cfg.fd_step);
    const double gn = g.norm();
    if (!(gn > cfg.grad_tol)) {
      r.converged = true;
      break;
    }
    double alpha = step_len / gn;
    if (cfg.barzilai_borwein && s_prev.size() == g.size()) {
      const double sy = s_prev.dot(g - g_prev);
      if (sy > 0.0) alpha = std::min(s_prev.squaredNorm() / sy, cfg.max_step / gn);
    }
    bool accepted = false;
    VecX x_new;
    double e_new = e;
    while (alpha * gn >= cfg.min_step) {
      x_new = r.x - alpha * g;
      if (project) x_new = project(x_new);
      e_new = f(x_new);
      if (e_new <= e + cfg.armijo * g.dot(x_new - r.x) && e_new < e) {
        accepted = true;
        break;
      }
      alpha *= cfg.shrink;
    }
    if (!accepted) {
      r.line_search_failed = true;
      break;
    }
    ++r.iterations;
    const double decrease = e - e_new;
    s_prev = x_new - r.x;
    g_prev = g;
    r.x = std::move(x_new);
    e = e_new;
    r.trace.push_back(e);
    step_len = 2.0 * alpha * gn;
    if (e <= cfg.energy_tol || decrease <= cfg.rel_tol * std::abs(e)) {
      r.converged = true;
      break;
    }
  }
  return r;
}

/// Euclidean projection onto the probability simplex.
inline VecX project_simplex(const VecX& v) {
  const Eigen::Index n = v.size();
  if (n == 0) return v;
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0, tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumsum += u[static_cast<std::size_t>(k)];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[static_cast<std::size_t>(k)] - t > 0.0) tau = t;
  }
  return (v.array() - tau).cwiseMax(0.0);
}

}  // namespace msk
