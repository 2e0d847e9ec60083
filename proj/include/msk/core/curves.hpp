#pragma once

#include <algorithm>
#include <cmath>

namespace msk {

// Normalized Hill-type force curves. Forces are fractions of f_max, lengths are
// normalized by l_m0 (fiber) or l_t0 (tendon). Shapes follow the Thelen-style
// forms: Gaussian active force-length, exponential passive fiber, exponential
// toe + linear tendon. Force-velocity is not modeled (quasi-static).
struct CurveSet {
  double active_width = 0.45;         // Gaussian shape factor of f_CE
  double passive_stiffness = 4.0;     // exponential shape factor of f_PE
  double passive_strain = 0.6;        // fiber strain at which f_PE == 1
  double tendon_strain = 0.03;        // tendon strain at which f_SE == 1
  double tendon_toe_force = 0.33;     // f_SE at the end of the toe region
  double tendon_toe_stiffness = 3.0;  // exponential shape factor of the toe region
  double tendon_toe_fraction = 0.609; // toe-region strain as a fraction of tendon_strain

  double active(double l_norm, double activation) const {
    const double d = l_norm - 1.0;
    return activation * std::exp(-d * d / active_width);
  }

  double passive(double l_norm) const {
    if (l_norm <= 1.0) return 0.0;
    return std::expm1(passive_stiffness * (l_norm - 1.0) / passive_strain) / std::expm1(passive_stiffness);
  }

  double tendon(double l_norm) const {
    const double strain = l_norm - 1.0;
    if (strain <= 0.0) return 0.0;
    const double toe_strain = tendon_toe_fraction * tendon_strain;
    if (strain <= toe_strain)
      return tendon_toe_force * std::expm1(tendon_toe_stiffness * strain / toe_strain) /
             std::expm1(tendon_toe_stiffness);
    return tendon_toe_force + tendon_linear_stiffness() * (strain - toe_strain);
  }

  /// Slope of the linear tendon region; chosen so tendon(1 + tendon_strain) == 1.
  double tendon_linear_stiffness() const {
    const double toe_strain = tendon_toe_fraction * tendon_strain;
    return (1.0 - tendon_toe_force) / (tendon_strain - toe_strain);
  }

  /// Normalized tendon length carrying normalized force `force` (inverse of tendon()).
  double tendon_length_for_force(double force) const {
    if (force <= 0.0) return 1.0;
    const double toe_strain = tendon_toe_fraction * tendon_strain;
    if (force <= tendon_toe_force)
      return 1.0 + toe_strain / tendon_toe_stiffness *
                       std::log1p(force * std::expm1(tendon_toe_stiffness) / tendon_toe_force);
    return 1.0 + toe_strain + (force - tendon_toe_force) / tendon_linear_stiffness();
  }

  bool operator==(const CurveSet&) const = default;
};

}  // namespace msk
