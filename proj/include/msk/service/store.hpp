#pragma once

#include "msk/io/json.hpp"

#include <cstdlib>
#include <filesystem>
#include <mutex>

namespace msk {

inline constexpr const char* kDataDirEnv = "MSK_DATA_DIR";

/// Data directory: the explicit path, else $MSK_DATA_DIR, else ./msk-data.
inline std::filesystem::path data_directory(const std::string& explicit_path = "") {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* env = std::getenv(kDataDirEnv); env && *env) return env;
  return "msk-data";
}

/// Content-addressed, write-once storage for model snapshots, edits and
/// reports. Objects are named by the SHA-256 of their canonical text, so a
/// stored snapshot never changes.
class ProjectStore {
public:
  explicit ProjectStore(std::filesystem::path root) : root_(std::move(root)) {
    for (const char* sub : {"models", "edits", "reports"}) std::filesystem::create_directories(root_ / sub);
  }

  const std::filesystem::path& root() const { return root_; }

  /// Stores the model and returns its hash.
  std::string put_model(const Model& m) { return put("models", model_to_text(m)); }

  Model get_model(const std::string& hash) const { return model_from_text(get("models", hash), "model " + hash); }

  bool has_model(const std::string& hash) const { return std::filesystem::exists(path("models", hash)); }

  std::string put_edit(const Json& edit) { return put("edits", canonical_dump(edit)); }
  Json get_edit(const std::string& hash) const { return parse_json(get("edits", hash), "edit " + hash); }

  /// Reports must name the model they were computed from.
  std::string put_report(const Json& report) {
    if (!report.contains("model_hash") || !report["model_hash"].is_string())
      throw Error("report must reference a model_hash");
    if (!has_model(report["model_hash"].get<std::string>())) throw Error("report references an unknown model");
    return put("reports", canonical_dump(report));
  }
  Json get_report(const std::string& hash) const { return parse_json(get("reports", hash), "report " + hash); }

private:
  std::filesystem::path path(const char* kind, const std::string& hash) const {
    if (hash.size() != 64 || hash.find_first_not_of("0123456789abcdef") != std::string::npos)
      throw Error("malformed object hash '" + hash + "'");
    return root_ / kind / (hash + ".json");
  }

  std::string put(const char* kind, const std::string& text) {
    const std::string hash = sha256_hex(text);
    const auto p = path(kind, hash);
    std::lock_guard lock(mutex_);
    if (!std::filesystem::exists(p)) {
      const auto tmp = p.string() + ".tmp";
      write_text_file(tmp, text);
      std::filesystem::rename(tmp, p);
    }
    return hash;
  }

  std::string get(const char* kind, const std::string& hash) const {
    const auto p = path(kind, hash);
    if (!std::filesystem::exists(p)) throw Error(std::string(kind) + " object '" + hash + "' not found");
    return read_text_file(p.string());
  }

  std::filesystem::path root_;
  std::mutex mutex_;
};

}  // namespace msk
