#pragma once

#include "msk/core/characteristics.hpp"
#include "msk/core/model.hpp"

namespace msk {

struct LengthAngleCurve {
  std::string muscle;
  std::string motion;
  std::vector<double> theta;
  std::vector<double> length;  // musculotendon length (m)
  CurveCharacteristics characteristics;
};

inline bool has_motion(const MusculotendonUnit& m, std::string_view motion) {
  return std::find(m.motions.begin(), m.motions.end(), motion) != m.motions.end();
}

/// Poses of a motion sweep at `samples` uniform normalized angles, every other
/// joint at the conditioning pose.
inline std::vector<Pose> motion_sweep(const Model& model, const JointMotion& motion, int samples) {
  if (samples < 2) throw Error("motion sweep needs at least 2 samples");
  const Pose base = model.conditioning_pose();
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) poses.push_back(apply_motion(model, motion, base, static_cast<double>(i) / (samples - 1)));
  return poses;
}

inline LengthAngleCurve length_angle_curve(const Model& model, const MusculotendonUnit& m, const JointMotion& motion,
                                           int samples = 41) {
  if (!has_motion(m, motion.id))
    throw Error("muscle '" + m.id + "' is not registered on motion '" + motion.id + "'");
  LengthAngleCurve c{m.id, motion.id, {}, {}, {}};
  const auto poses = motion_sweep(model, motion, samples);
  for (int i = 0; i < samples; ++i) {
    c.theta.push_back(static_cast<double>(i) / (samples - 1));
    c.length.push_back(musculotendon_length(m, model.skeleton, poses[static_cast<std::size_t>(i)]));
  }
  c.characteristics = characterize(c.length);
  return c;
}

inline LengthAngleCurve length_angle_curve(const Model& model, std::string_view muscle, std::string_view motion,
                                           int samples = 41) {
  return length_angle_curve(model, model.muscle(muscle), model.motion(motion), samples);
}

/// Percentage of (muscle, motion, interval) samples whose length slope has
/// opposite sign in the two models. Muscles are matched by id.
inline double functional_disorder_rate(const Model& reference, const Model& target,
                                       std::span<const std::string> motions = {}, int samples = 41) {
  std::size_t total = 0, flipped = 0;
  for (const auto& m : reference.muscles) {
    const auto& mt = target.muscle(m.id);
    for (const auto& mo : m.motions) {
      if (!motions.empty() && std::find(motions.begin(), motions.end(), mo) == motions.end()) continue;
      const auto a = length_angle_curve(reference, m, reference.motion(mo), samples);
      const auto b = length_angle_curve(target, mt, target.motion(mo), samples);
      for (std::size_t i = 1; i < a.length.size(); ++i) {
        const double da = a.length[i] - a.length[i - 1];
        const double db = b.length[i] - b.length[i - 1];
        ++total;
        if (da * db < 0.0) ++flipped;
      }
    }
  }
  return total ? 100.0 * static_cast<double>(flipped) / static_cast<double>(total) : 0.0;
}

}  // namespace msk
