#pragma once

#include "msk/io/json.hpp"
#include "msk/rom/dataset.hpp"

#include <charconv>

namespace msk {

enum class DatasetFormat { jsonl, csv };

inline DatasetFormat dataset_format_from_string(std::string_view s) {
  if (s == "jsonl") return DatasetFormat::jsonl;
  if (s == "csv") return DatasetFormat::csv;
  throw Error("unknown dataset format '" + std::string(s) + "' (expected jsonl or csv)");
}

/// Format from the file extension: .csv is CSV, anything else JSON lines.
inline DatasetFormat dataset_format_for_path(const std::string& path) {
  return path.ends_with(".csv") ? DatasetFormat::csv : DatasetFormat::jsonl;
}

struct IngestOptions {
  bool mirror = false;
  double subsample = 1.0;  // keep ratio, applied after mirroring
};

struct DatasetProvenance {
  std::string source;
  DatasetFormat format = DatasetFormat::jsonl;
  std::size_t records = 0;  // poses read from the file
  bool mirrored = false;
  double subsample = 1.0;
  std::size_t poses = 0;  // poses after the transforms
};

struct IngestedDataset {
  PoseDataset dataset;
  DatasetProvenance provenance;
};

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw Error(where + ": expected a number, got '" + std::string(s) + "'");
  return v;
}

inline bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace detail

// CSV columns: root_qw root_qx root_qy root_qz root_tx root_ty root_tz, then one
// column per revolute bone (<id>) and four per ball bone (<id>.qw .. <id>.qz).
// Any subset may be declared in the header; undeclared coordinates stay at rest.
inline std::vector<std::string> dataset_csv_columns(const Skeleton& skel) {
  std::vector<std::string> cols{"root_qw", "root_qx", "root_qy", "root_qz", "root_tx", "root_ty", "root_tz"};
  for (const auto& b : skel.bones()) {
    if (b.joint_type == JointType::revolute) cols.push_back(b.id);
    if (b.joint_type == JointType::ball_and_socket)
      for (const char* c : {".qw", ".qx", ".qy", ".qz"}) cols.push_back(b.id + c);
  }
  return cols;
}

inline std::vector<Pose> read_poses_jsonl(std::istream& in, const Skeleton& skel, const std::string& source) {
  std::vector<Pose> poses;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (detail::blank(line)) continue;
    const std::string where = source + ":" + std::to_string(n);
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw Error(where + ": malformed record: " + e.what());
    }
    try {
      poses.push_back(pose_from_json(j, skel, "pose"));
    } catch (const Error& e) {
      throw Error(where + ": " + e.what());
    }
  }
  return poses;
}

inline std::vector<Pose> read_poses_csv(std::istream& in, const Skeleton& skel, const std::string& source) {
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!detail::blank(line)) break;
  }
  if (detail::blank(line)) throw Error(source + ": missing CSV header");
  const auto header_fields = detail::split_csv_line(line);
  const std::vector<std::string> header(header_fields.begin(), header_fields.end());
  const auto known = dataset_csv_columns(skel);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::find(known.begin(), known.end(), header[c]) == known.end())
      throw Error(source + ":" + std::to_string(n) + ": unknown column '" + header[c] + "'");
    if (std::find(header.begin(), header.begin() + static_cast<std::ptrdiff_t>(c), header[c]) !=
        header.begin() + static_cast<std::ptrdiff_t>(c))
      throw Error(source + ":" + std::to_string(n) + ": duplicate column '" + header[c] + "'");
  }

  std::vector<Pose> poses;
  while (std::getline(in, line)) {
    ++n;
    if (detail::blank(line)) continue;
    const std::string where = source + ":" + std::to_string(n);
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size())
      throw Error(where + ": expected " + std::to_string(header.size()) + " fields, got " + std::to_string(fields.size()));
    Pose p = skel.rest_pose();
    Eigen::Vector4d root(1.0, 0.0, 0.0, 0.0);
    std::map<int, Eigen::Vector4d> balls;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string& col = header[c];
      const double v = detail::parse_double(fields[c], where + " column '" + col + "'");
      if (col.starts_with("root_q")) {
        root[std::string_view("wxyz").find(col.back())] = v;
      } else if (col.starts_with("root_t")) {
        p.root_translation[std::string_view("xyz").find(col.back())] = v;
      } else if (const auto dot = col.rfind(".q"); dot != std::string::npos && dot + 3 == col.size()) {
        const int b = skel.index_of(col.substr(0, dot));
        auto it = balls.try_emplace(b, Eigen::Vector4d(1.0, 0.0, 0.0, 0.0)).first;
        it->second[std::string_view("wxyz").find(col.back())] = v;
      } else {
        p.joints[static_cast<std::size_t>(skel.index_of(col))].angle = v;
      }
    }
    auto to_quat = [&](const Eigen::Vector4d& q, const std::string& what) {
      if (std::abs(q.norm() - 1.0) > 1e-6) throw Error(where + ": " + what + " is not a unit quaternion");
      return Quat(q[0], q[1], q[2], q[3]);
    };
    p.root_rotation = to_quat(root, "root rotation");
    for (const auto& [b, q] : balls) p.joints[static_cast<std::size_t>(b)].rotation = to_quat(q, skel.bone(b).id);
    poses.push_back(std::move(p));
  }
  return poses;
}

inline IngestedDataset ingest_dataset(std::istream& in, const Skeleton& skel, DatasetFormat format,
                                      const IngestOptions& opt = {}, const std::string& source = "dataset") {
  IngestedDataset out;
  out.dataset.poses = format == DatasetFormat::csv ? read_poses_csv(in, skel, source) : read_poses_jsonl(in, skel, source);
  auto& prov = out.provenance;
  prov.source = source;
  prov.format = format;
  prov.records = out.dataset.poses.size();
  if (opt.mirror) out.dataset = mirror_dataset(skel, std::move(out.dataset));
  if (opt.subsample != 1.0) out.dataset = subsample_dataset(std::move(out.dataset), opt.subsample);
  prov.mirrored = out.dataset.mirrored;
  prov.subsample = out.dataset.subsample_ratio;
  prov.poses = out.dataset.poses.size();
  return out;
}

inline IngestedDataset ingest_dataset(const std::string& path, const Skeleton& skel, DatasetFormat format,
                                      const IngestOptions& opt = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  return ingest_dataset(in, skel, format, opt, path);
}

inline IngestedDataset ingest_dataset(const std::string& path, const Skeleton& skel, const IngestOptions& opt = {}) {
  return ingest_dataset(path, skel, dataset_format_for_path(path), opt);
}

inline void write_poses_jsonl(std::ostream& out, const Skeleton& skel, const PoseDataset& d) {
  for (const auto& p : d.poses) out << to_json(p, skel).dump() << '\n';
}

inline void write_poses_csv(std::ostream& out, const Skeleton& skel, const PoseDataset& d) {
  const auto cols = dataset_csv_columns(skel);
  for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << cols[c];
  out << '\n';
  char buf[32];
  auto num = [&](double v) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string_view(buf, static_cast<std::size_t>(ptr - buf));
  };
  for (const auto& p : d.poses) {
    const Quat& r = p.root_rotation;
    out << num(r.w()) << ',' << num(r.x()) << ',' << num(r.y()) << ',' << num(r.z());
    for (int k = 0; k < 3; ++k) out << ',' << num(p.root_translation[k]);
    for (int i = 0; i < skel.size(); ++i) {
      const auto& c = p.joints[static_cast<std::size_t>(i)];
      if (skel.bone(i).joint_type == JointType::revolute) out << ',' << num(c.angle);
      if (skel.bone(i).joint_type == JointType::ball_and_socket)
        out << ',' << num(c.rotation.w()) << ',' << num(c.rotation.x()) << ',' << num(c.rotation.y()) << ','
            << num(c.rotation.z());
    }
    out << '\n';
  }
}

inline void write_dataset(const std::string& path, const Skeleton& skel, const PoseDataset& d,
                          std::optional<DatasetFormat> format = {}) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset '" + path + "'");
  if (format.value_or(dataset_format_for_path(path)) == DatasetFormat::csv)
    write_poses_csv(out, skel, d);
  else
    write_poses_jsonl(out, skel, d);
}

}  // namespace msk
