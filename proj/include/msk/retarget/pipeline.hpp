#pragma once

#include "msk/retarget/deform.hpp"
#include "msk/retarget/ratio.hpp"
#include "msk/retarget/waypoints.hpp"
#include "msk/rom/grid.hpp"

namespace msk {

struct PipelineConfig {
  WaypointConfig waypoints;
  RatioConfig ratio;
  double relax_threshold = 0.0;  // N m; <= 0 disables key-pose relaxation
  std::vector<std::string> grid_joints{"hip_r"};
  GridResolution resolution;
};

struct GridComparison {
  std::string joint;
  double unretargeted = 0.0;  // % cells differing from the reference (or edited target)
  double retargeted = 0.0;
};

struct RetargetReport {
  std::vector<MuscleOptimization> waypoints;  // stage 1 per-muscle traces and curve characteristics
  std::vector<double> ratio_trace;            // stage 3 E_apt
  std::vector<PeakShift> peaks;
  std::vector<std::string> flagged_motions;
  std::vector<GridComparison> grids;
  double disorder_unretargeted = 0.0;  // functional disorder %, naive vs reference
  double disorder_retargeted = 0.0;
  int relax_iterations = 0;
  int stages_completed = 0;
  std::string error;  // non-empty when a stage failed
};

struct RetargetResult {
  Model model;
  Model naive;
  RetargetReport report;
};

/// (stage 1..3, fraction of the stage done)
using StageProgress = std::function<void(int, double)>;

/// Grid of the reference model, or of the edited target when an edit is given.
inline RomGrid reference_grid(const Model& reference, std::string_view joint, const Vec3& center,
                              const GridResolution& res, const RomEdit* edit) {
  GridOptions o;
  o.resolution = res;
  o.cone_center = center;
  o.edit = edit;
  return rom_grid(reference, joint, o);
}

/// Three sequential stages: (1) deform the skeleton, carry and optimize the
/// waypoints; (2) fit fiber/tendon lengths to the dataset (inverse-edited when
/// edits are given) and optionally relax key-poses; (3) fit fiber/tendon ratios
/// to the reference angles of peak torque.
inline RetargetResult retarget_pipeline(const Model& reference, const SkeletonParams& params, const PoseDataset& dataset,
                                        const RomEdit* edits = nullptr, const PipelineConfig& cfg = {},
                                        const StageProgress& progress = {}) {
  RetargetResult out;
  auto& rep = out.report;
  auto tick = [&](int stage, double f) {
    if (progress) progress(stage, f);
  };
  out.naive = naive_retarget(reference, params);
  out.model = out.naive;
  try {
    // Stage 1
    tick(1, 0.0);
    auto wp = optimize_waypoints(out.naive, reference, cfg.waypoints, [&](double f) { tick(1, f); });
    out.model = std::move(wp.model);
    rep.waypoints = std::move(wp.muscles);
    rep.stages_completed = 1;

    // Stage 2
    tick(2, 0.0);
    PoseDataset fit = dataset;
    if (edits && !edits->empty())
      for (auto& p : fit.poses) p = invert_rom_edit(reference.skeleton, *edits, p);
    out.model = estimate_lengths(std::move(out.model), fit);
    tick(2, 0.5);
    if (cfg.relax_threshold > 0.0) {
      auto rr = relax_keyposes(std::move(out.model), cfg.relax_threshold);
      out.model = std::move(rr.model);
      rep.relax_iterations = rr.iterations;
    }
    rep.stages_completed = 2;
    tick(2, 1.0);

    // Stage 3
    tick(3, 0.0);
    auto ratio = optimize_fiber_tendon_ratio(out.model, reference, cfg.ratio);
    out.model = std::move(ratio.model);
    rep.ratio_trace = std::move(ratio.trace);
    rep.peaks = std::move(ratio.peaks);
    rep.flagged_motions = std::move(ratio.flagged);
    rep.stages_completed = 3;
    tick(3, 0.5);

    rep.disorder_unretargeted = functional_disorder_rate(reference, out.naive);
    rep.disorder_retargeted = functional_disorder_rate(reference, out.model);
    for (const auto& joint : cfg.grid_joints) {
      const Vec3 center = cone_center_from_dataset(reference.skeleton, dataset, joint);
      const auto target = reference_grid(reference, joint, center, cfg.resolution, edits);
      GridOptions o;
      o.resolution = cfg.resolution;
      o.cone_center = center;
      rep.grids.push_back({joint, grid_error_rate(target, rom_grid(out.naive, joint, o)),
                           grid_error_rate(target, rom_grid(out.model, joint, o))});
    }
    tick(3, 1.0);
  } catch (const Error& e) {
    rep.error = "stage " + std::to_string(rep.stages_completed + 1) + ": " + e.what();
  }
  return out;
}

}  // namespace msk
