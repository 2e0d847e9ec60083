#pragma once

#include "msk/io/config.hpp"
#include "msk/io/report_io.hpp"
#include "msk/service/jobs.hpp"
#include "msk/service/store.hpp"

#include <shared_mutex>

namespace msk {

struct NotFound : Error {
  using Error::Error;
};

struct Conflict : Error {
  using Error::Error;
};

/// Grid of `joint` with the cone centered on the dataset's mean direction.
inline RomGrid joint_grid(const Model& model, const PoseDataset& dataset, const std::string& joint,
                          const GridResolution& res, const RomEdit* edit = nullptr) {
  const std::string name = resolve_joint_name(model.skeleton, joint);
  GridOptions o;
  o.resolution = res;
  o.cone_center = cone_center_from_dataset(model.skeleton, dataset, name);
  o.edit = edit;
  return rom_grid(model, name, o);
}

inline bool is_identity(const SkeletonParams& p) {
  for (const auto& [id, b] : p.bones)
    if (!(b == BoneParams{})) return false;
  return p.trunk == TrunkParams{} && p.extremity_scale == 1.0 && p.global_scale == 1.0;
}

/// Immutable view of the project at one point in time.
struct ProjectSnapshot {
  Model model;
  std::string hash;
  SkeletonParams params;
  RomEdit edit;
  std::string report;  // store hash of the latest retarget report, if any
};

/// One open project: a reference model and dataset, the current model with the
/// skeleton parameters and ROM edits that produced it, and a job queue. Reads
/// use immutable snapshots; mutations are serialized and rejected (Conflict)
/// when the caller's expected hash is stale or a job is pending.
class Project {
public:
  Project(Model reference, PoseDataset dataset, ProjectStore& store, PipelineConfig pipeline = {})
      : reference_(std::move(reference)), dataset_(std::move(dataset)), store_(store), pipeline_(std::move(pipeline)) {
    auto s = std::make_shared<ProjectSnapshot>();
    s->model = reference_;
    s->hash = store_.put_model(reference_);
    reference_hash_ = s->hash;
    current_ = std::move(s);
  }

  std::shared_ptr<const ProjectSnapshot> snapshot() const {
    std::shared_lock lock(mutex_);
    return current_;
  }

  const Model& reference() const { return reference_; }
  const std::string& reference_hash() const { return reference_hash_; }
  const PoseDataset& dataset() const { return dataset_; }
  const PipelineConfig& pipeline() const { return pipeline_; }
  ProjectStore& store() { return store_; }
  JobQueue& jobs() { return jobs_; }

  /// Deformed (unretargeted) model for `params`; identity parameters restore the reference.
  std::shared_ptr<const ProjectSnapshot> set_params(const SkeletonParams& params, const std::optional<std::string>& expected) {
    validate_params(reference_.skeleton, params);
    std::unique_lock lock(mutex_);
    check(expected);
    if (current_->params == params) return current_;
    auto s = std::make_shared<ProjectSnapshot>(*current_);
    s->params = params;
    s->model = is_identity(params) ? reference_ : naive_retarget(reference_, params);
    s->hash = store_.put_model(s->model);
    s->report.clear();
    current_ = std::move(s);
    return current_;
  }

  std::shared_ptr<const ProjectSnapshot> set_edit(const std::string& joint, const EditSpec& spec,
                                                  const std::optional<std::string>& expected) {
    const std::string name = resolve_joint_name(reference_.skeleton, joint);
    RomEdit single = resolve_edits({{name, spec}}, reference_.skeleton, dataset_);
    std::unique_lock lock(mutex_);
    check(expected);
    auto s = std::make_shared<ProjectSnapshot>(*current_);
    s->edit.joints[name] = single.joints.at(name);
    store_.put_edit(to_json(s->edit));
    current_ = std::move(s);
    return current_;
  }

  /// Queues the three-stage pipeline on the current parameters and edits; the
  /// result becomes the current model.
  std::string submit_retarget(const std::optional<std::string>& expected, const PipelineConfig& cfg) {
    std::unique_lock lock(mutex_);
    check(expected);
    const auto base = current_;
    return jobs_.submit(JobKind::retarget, [this, base, cfg](const JobProgress& progress) {
      auto r = retarget_pipeline(reference_, base->params, dataset_, base->edit.empty() ? nullptr : &base->edit, cfg,
                                 [&](int stage, double f) { progress((stage - 1 + f) / 3.0, stage); });
      if (!r.report.error.empty()) throw Error(r.report.error);
      auto s = std::make_shared<ProjectSnapshot>(*base);
      s->model = std::move(r.model);
      s->hash = store_.put_model(s->model);
      s->report = store_.put_report({{"model_hash", s->hash},
                                     {"base_model_hash", base->hash},
                                     {"reference_hash", reference_hash_},
                                     {"params", to_json(base->params)},
                                     {"edit", to_json(base->edit)},
                                     {"report", to_json(r.report)}});
      std::unique_lock l(mutex_);
      current_ = s;
      return s->report;
    });
  }

private:
  void check(const std::optional<std::string>& expected) const {
    if (expected && *expected != current_->hash)
      throw Conflict("model changed: expected " + *expected + ", current " + current_->hash);
    if (jobs_.busy()) throw Conflict("a retarget job is pending");
  }

  Model reference_;
  std::string reference_hash_;
  PoseDataset dataset_;
  ProjectStore& store_;
  PipelineConfig pipeline_;
  mutable std::shared_mutex mutex_;
  std::shared_ptr<const ProjectSnapshot> current_;
  JobQueue jobs_;
};

}  // namespace msk
