#pragma once

#include "msk/dynamics/muscle_forces.hpp"
#include "msk/io/grid_io.hpp"
#include "msk/retarget/pipeline.hpp"

namespace msk {

/// Joint name as given, or its right-side counterpart when only sided joints
/// exist ("hip" -> "hip_r").
inline std::string resolve_joint_name(const Skeleton& skel, const std::string& name) {
  if (skel.find(name)) return name;
  for (const auto& b : skel.bones())
    if (b.joint == name) return name;
  for (const auto& b : skel.bones())
    if (b.joint == name + "_r" || b.id == name + "_r") return name + "_r";
  throw Error("unknown joint '" + name + "'");
}

/// Motions acting on a joint, in model order.
inline std::vector<const JointMotion*> motions_of_joint(const Model& model, const std::string& joint) {
  const int j = model.skeleton.joint_index(joint);
  std::vector<const JointMotion*> out;
  for (const auto& mo : model.motions)
    if (model.skeleton.joint_index(mo.joint) == j) out.push_back(&mo);
  return out;
}

inline Json to_json(const CurveCharacteristics& c) {
  return {{"theta_max", c.theta_max},
          {"theta_min", c.theta_min},
          {"delta", c.delta},
          {"classification", std::string(to_string(c.classification))}};
}

inline Json to_json(const LengthAngleCurve& c) {
  return {{"muscle", c.muscle},
          {"motion", c.motion},
          {"theta", c.theta},
          {"length", c.length},
          {"characteristics", to_json(c.characteristics)}};
}

inline Json to_json(const TorqueCurve& c) {
  return {{"motion", c.motion},         {"theta", c.theta}, {"torque", c.torque}, {"peak_theta", c.peak_theta},
          {"peak_torque", c.peak_torque}, {"flat", c.flat}};
}

inline std::string length_curve_csv(const LengthAngleCurve& c) {
  std::string s = "theta,length\n";
  for (std::size_t i = 0; i < c.theta.size(); ++i)
    s += detail::shortest(c.theta[i]) + "," + detail::shortest(c.length[i]) + "\n";
  return s;
}

inline std::string torque_curve_csv(const TorqueCurve& c) {
  std::string s = "theta,torque\n";
  for (std::size_t i = 0; i < c.theta.size(); ++i)
    s += detail::shortest(c.theta[i]) + "," + detail::shortest(c.torque[i]) + "\n";
  return s;
}

/// Torque-angle curves of every motion on a joint.
inline Json torque_angle_payload(const Model& model, const std::string& joint, int samples = 41, double activation = 1.0) {
  const std::string name = resolve_joint_name(model.skeleton, joint);
  Json curves = Json::array();
  for (const auto* mo : motions_of_joint(model, name)) curves.push_back(to_json(torque_angle_curve(model, *mo, samples, activation)));
  return {{"joint", name}, {"activation", activation}, {"curves", curves}};
}

/// Length-angle curves of one muscle over the given motion, or over all its
/// registered motions when `motion` is empty.
inline Json length_angle_payload(const Model& model, const std::string& muscle, const std::string& motion = "",
                                 int samples = 41) {
  const auto& m = model.muscle(muscle);
  Json curves = Json::array();
  if (motion.empty()) {
    for (const auto& mo : m.motions) curves.push_back(to_json(length_angle_curve(model, m, model.motion(mo), samples)));
  } else {
    curves.push_back(to_json(length_angle_curve(model, m, model.motion(motion), samples)));
  }
  return {{"muscle", m.id}, {"curves", curves}};
}

inline Json to_json(const RetargetReport& r) {
  Json wps = Json::array();
  for (const auto& m : r.waypoints) {
    Json before = Json::array(), after = Json::array(), ref = Json::array();
    for (const auto& c : m.before) before.push_back(to_json(c));
    for (const auto& c : m.after) after.push_back(to_json(c));
    for (const auto& c : m.reference) ref.push_back(to_json(c));
    wps.push_back({{"muscle", m.muscle},
                   {"trace", m.trace},
                   {"iterations", m.iterations},
                   {"converged", m.converged},
                   {"before", before},
                   {"after", after},
                   {"reference", ref}});
  }
  Json peaks = Json::array();
  for (const auto& p : r.peaks)
    peaks.push_back({{"motion", p.motion}, {"reference", p.reference}, {"before", p.before}, {"after", p.after}, {"flat", p.flat}});
  Json grids = Json::array();
  for (const auto& g : r.grids)
    grids.push_back({{"joint", g.joint}, {"unretargeted", g.unretargeted}, {"retargeted", g.retargeted}});
  return {{"waypoints", wps},
          {"ratio_trace", r.ratio_trace},
          {"peaks", peaks},
          {"flagged_motions", r.flagged_motions},
          {"grids", grids},
          {"disorder_unretargeted", r.disorder_unretargeted},
          {"disorder_retargeted", r.disorder_retargeted},
          {"relax_iterations", r.relax_iterations},
          {"stages_completed", r.stages_completed},
          {"error", r.error}};
}

/// Human-readable summary.
inline std::string report_text(const RetargetReport& r) {
  std::ostringstream s;
  s << "stages completed: " << r.stages_completed << "/3\n";
  if (!r.error.empty()) s << "error: " << r.error << "\n";
  for (const auto& g : r.grids)
    s << "grid " << g.joint << ": unretargeted " << g.unretargeted << "% retargeted " << g.retargeted << "%\n";
  s << "functional disorder: unretargeted " << r.disorder_unretargeted << "% retargeted " << r.disorder_retargeted << "%\n";
  for (const auto& p : r.peaks)
    s << "peak " << p.motion << ": reference " << p.reference << " before " << p.before << " after " << p.after
      << (p.flat ? " (flat)" : "") << "\n";
  std::size_t unconverged = 0;
  for (const auto& m : r.waypoints) unconverged += !m.converged;
  s << "waypoint optimizations: " << r.waypoints.size() << " muscles, " << unconverged << " hit the iteration cap\n";
  if (!r.ratio_trace.empty())
    s << "ratio energy: " << r.ratio_trace.front() << " -> " << r.ratio_trace.back() << " in " << r.ratio_trace.size() - 1
      << " steps\n";
  return s.str();
}

/// Per-muscle, per-motion characteristics before and after stage 1.
inline std::string report_characteristics_csv(const RetargetReport& r, const Model& reference) {
  std::string s = "muscle,motion,phase,theta_max,theta_min,delta,classification\n";
  for (const auto& m : r.waypoints) {
    const auto& motions = reference.muscle(m.muscle).motions;
    auto rows = [&](const std::vector<CurveCharacteristics>& cs, const char* phase) {
      for (std::size_t k = 0; k < cs.size() && k < motions.size(); ++k)
        s += m.muscle + "," + motions[k] + "," + phase + "," + detail::shortest(cs[k].theta_max) + "," +
             detail::shortest(cs[k].theta_min) + "," + detail::shortest(cs[k].delta) + "," +
             std::string(to_string(cs[k].classification)) + "\n";
    };
    rows(m.reference, "reference");
    rows(m.before, "before");
    rows(m.after, "after");
  }
  return s;
}

/// Energy traces: one row per (series, iteration).
inline std::string report_traces_csv(const RetargetReport& r) {
  std::string s = "series,iteration,energy\n";
  for (const auto& m : r.waypoints)
    for (std::size_t i = 0; i < m.trace.size(); ++i)
      s += "waypoints:" + m.muscle + "," + std::to_string(i) + "," + detail::shortest(m.trace[i]) + "\n";
  for (std::size_t i = 0; i < r.ratio_trace.size(); ++i)
    s += "ratio," + std::to_string(i) + "," + detail::shortest(r.ratio_trace[i]) + "\n";
  return s;
}

}  // namespace msk
