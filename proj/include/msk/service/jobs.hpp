#pragma once

#include "msk/io/json.hpp"

#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <thread>

namespace msk {

enum class JobKind { estimate, retarget, grid, curves };
enum class JobStatus { queued, running, done, failed };

inline std::string_view to_string(JobKind k) {
  switch (k) {
    case JobKind::estimate: return "estimate";
    case JobKind::retarget: return "retarget";
    case JobKind::grid: return "grid";
    case JobKind::curves: return "curves";
  }
  return "?";
}

inline std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "?";
}

/// queued -> running -> done | failed; terminal states are immutable and
/// progress never decreases.
class JobRecord {
public:
  JobRecord(std::string id, JobKind kind) : id_(std::move(id)), kind_(kind) {}

  const std::string& id() const { return id_; }
  JobKind kind() const { return kind_; }
  JobStatus status() const { return status_; }
  double progress() const { return progress_; }
  int stage() const { return stage_; }
  const std::string& result() const { return result_; }
  const std::string& error() const { return error_; }
  bool terminal() const { return status_ == JobStatus::done || status_ == JobStatus::failed; }

  void start() {
    if (status_ != JobStatus::queued) throw Error("job " + id_ + ": cannot start from " + std::string(to_string(status_)));
    status_ = JobStatus::running;
  }

  void report_progress(double fraction, int stage = 0) {
    if (status_ != JobStatus::running) throw Error("job " + id_ + ": progress outside the running state");
    progress_ = std::max(progress_, std::clamp(fraction, 0.0, 1.0));
    stage_ = std::max(stage_, stage);
  }

  /// `result` locates the output (a store hash).
  void finish(std::string result) {
    if (status_ != JobStatus::running) throw Error("job " + id_ + ": cannot finish from " + std::string(to_string(status_)));
    status_ = JobStatus::done;
    progress_ = 1.0;
    result_ = std::move(result);
  }

  void fail(std::string error) {
    if (terminal()) throw Error("job " + id_ + ": cannot fail from " + std::string(to_string(status_)));
    status_ = JobStatus::failed;
    error_ = std::move(error);
  }

  Json to_json() const {
    Json j = {{"id", id_},
              {"kind", std::string(to_string(kind_))},
              {"status", std::string(to_string(status_))},
              {"progress", progress_},
              {"stage", stage_}};
    if (!result_.empty()) j["result"] = result_;
    if (!error_.empty()) j["error"] = error_;
    return j;
  }

private:
  std::string id_;
  JobKind kind_;
  JobStatus status_ = JobStatus::queued;
  double progress_ = 0.0;
  int stage_ = 0;
  std::string result_;
  std::string error_;
};

/// Progress callback handed to a running job: (fraction, stage).
using JobProgress = std::function<void(double, int)>;
/// Job body; returns the result locator or throws.
using JobBody = std::function<std::string(const JobProgress&)>;

/// Runs jobs one at a time on a single worker thread, in submission order.
class JobQueue {
public:
  JobQueue() : worker_([this] { run(); }) {}
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  ~JobQueue() {
    {
      std::lock_guard lock(mutex_);
      stopping_ = true;
    }
    cv_.notify_all();
    worker_.join();
  }

  std::string submit(JobKind kind, JobBody body) {
    std::lock_guard lock(mutex_);
    const std::string id = "job-" + std::to_string(++counter_);
    jobs_.emplace(id, JobRecord(id, kind));
    pending_.push_back({id, std::move(body)});
    cv_.notify_all();
    return id;
  }

  std::optional<JobRecord> get(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second;
  }

  /// True while any job is queued or running.
  bool busy() const {
    std::lock_guard lock(mutex_);
    return !pending_.empty() || active_;
  }

  /// Blocks until the job is terminal.
  JobRecord wait(const std::string& id) const {
    std::unique_lock lock(mutex_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) throw Error("unknown job '" + id + "'");
    done_cv_.wait(lock, [&] { return it->second.terminal(); });
    return it->second;
  }

private:
  struct Pending {
    std::string id;
    JobBody body;
  };

  void run() {
    while (true) {
      Pending job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return stopping_ || !pending_.empty(); });
        if (pending_.empty()) return;
        job = std::move(pending_.front());
        pending_.pop_front();
        jobs_.at(job.id).start();
        active_ = true;
      }
      auto progress = [&](double f, int stage) {
        std::lock_guard lock(mutex_);
        jobs_.at(job.id).report_progress(f, stage);
      };
      std::string result, error;
      bool ok = false;
      try {
        result = job.body(progress);
        ok = true;
      } catch (const std::exception& e) {
        error = e.what();
      }
      {
        std::lock_guard lock(mutex_);
        auto& rec = jobs_.at(job.id);
        if (ok)
          rec.finish(std::move(result));
        else
          rec.fail(std::move(error));
        active_ = false;
      }
      done_cv_.notify_all();
    }
  }

  mutable std::mutex mutex_;
  std::condition_variable cv_;
  mutable std::condition_variable done_cv_;
  std::map<std::string, JobRecord> jobs_;
  std::deque<Pending> pending_;
  std::uint64_t counter_ = 0;
  bool active_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

}  // namespace msk
