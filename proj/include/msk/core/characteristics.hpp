#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace msk {

struct Extremum {
  double theta = 0.0;  // normalized position in [0, 1]
  double value = 0.0;
  bool flat = false;   // every sample equal
};

/// Argmax of a curve sampled uniformly on [0, 1], refined by a parabola through
/// the best sample and its neighbours. Ties resolve to the lowest theta.
inline Extremum refined_argmax(std::span<const double> y) {
  Extremum e;
  const std::size_t n = y.size();
  if (n == 0) return e;
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const std::size_t i = static_cast<std::size_t>(std::distance(y.begin(), std::max_element(y.begin(), y.end())));
  const double h = n > 1 ? 1.0 / static_cast<double>(n - 1) : 0.0;
  e.theta = static_cast<double>(i) * h;
  e.value = y[i];
  const double scale = std::max({std::abs(*lo_it), std::abs(*hi_it), 1e-300});
  if (*hi_it - *lo_it <= 1e-12 * scale) {
    e.flat = true;
    e.theta = 0.0;
    return e;
  }
  if (i > 0 && i + 1 < n) {
    const double a = y[i - 1], b = y[i], c = y[i + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) {
      const double delta = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
      e.theta = (static_cast<double>(i) + delta) * h;
      e.value = b - 0.25 * (a - c) * delta;
    }
  }
  return e;
}

inline Extremum refined_argmin(std::span<const double> y) {
  std::vector<double> neg(y.begin(), y.end());
  for (auto& v : neg) v = -v;
  auto e = refined_argmax(neg);
  e.value = -e.value;
  return e;
}

enum class CurveClass { agonist, antagonist, non_monotonic };

inline std::string_view to_string(CurveClass c) {
  switch (c) {
    case CurveClass::agonist: return "agonist";
    case CurveClass::antagonist: return "antagonist";
    case CurveClass::non_monotonic: return "non_monotonic";
  }
  return "?";
}

/// Summary of a length-angle curve: where it peaks, where it bottoms out, and its span.
struct CurveCharacteristics {
  double theta_max = 0.0;
  double theta_min = 0.0;
  double delta = 0.0;  // max - min (m)
  CurveClass classification = CurveClass::non_monotonic;
};

/// Monotone decreasing curves are agonists, increasing ones antagonists; flat or
/// sign-changing curves are non-monotonic.
inline CurveClass classify_curve(std::span<const double> y) {
  if (y.size() < 2) return CurveClass::non_monotonic;
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  const double tol = 1e-12 + 1e-9 * range;
  if (range <= 1e-12) return CurveClass::non_monotonic;
  bool up = false, down = false;
  for (std::size_t i = 1; i < y.size(); ++i) {
    const double d = y[i] - y[i - 1];
    if (d > tol) up = true;
    if (d < -tol) down = true;
  }
  if (down && !up) return CurveClass::agonist;
  if (up && !down) return CurveClass::antagonist;
  return CurveClass::non_monotonic;
}

inline CurveCharacteristics characterize(std::span<const double> y) {
  CurveCharacteristics c;
  const auto mx = refined_argmax(y);
  const auto mn = refined_argmin(y);
  c.theta_max = mx.theta;
  c.theta_min = mn.theta;
  c.delta = std::max(0.0, mx.value - mn.value);
  c.classification = classify_curve(y);
  return c;
}

}  // namespace msk
