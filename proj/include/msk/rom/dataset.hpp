#pragma once

#include "msk/core/model.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace msk {

struct PoseDataset {
  std::vector<Pose> poses;
  bool mirrored = false;
  double subsample_ratio = 1.0;

  std::size_t size() const { return poses.size(); }
  bool empty() const { return poses.empty(); }
};

/// Bone id of the left/right counterpart (`_l` <-> `_r` suffix), or the id itself.
inline std::string mirror_bone_id(const std::string& id) {
  if (id.size() > 2) {
    const auto stem = id.substr(0, id.size() - 2);
    if (id.ends_with("_l")) return stem + "_r";
    if (id.ends_with("_r")) return stem + "_l";
  }
  return id;
}

/// Reflection of a rotation across the sagittal (x = 0) plane.
inline Quat mirror_rotation(const Quat& q) { return Quat(q.w(), q.x(), -q.y(), -q.z()); }

/// Left-right reflection of a pose. Assumes the skeleton itself is symmetric
/// about x = 0, with mirrored bones carrying mirrored frames.
inline Pose mirror_pose(const Skeleton& skel, const Pose& pose) {
  validate_pose(skel, pose);
  Pose out = pose;
  out.root_rotation = mirror_rotation(pose.root_rotation);
  out.root_translation.x() = -pose.root_translation.x();
  for (int i = 0; i < skel.size(); ++i) {
    const Bone& b = skel.bone(i);
    if (b.joint_type == JointType::free_root) continue;
    const int j = skel.index_of(mirror_bone_id(b.id));
    const auto& src = pose.joints[static_cast<std::size_t>(i)];
    auto& dst = out.joints[static_cast<std::size_t>(j)];
    dst.angle = src.angle;
    dst.rotation = mirror_rotation(src.rotation);
  }
  return out;
}

/// Appends the reflection of every pose.
inline PoseDataset mirror_dataset(const Skeleton& skel, PoseDataset d) {
  const std::size_t n = d.poses.size();
  d.poses.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) d.poses.push_back(mirror_pose(skel, d.poses[i]));
  d.mirrored = true;
  return d;
}

/// Keeps every k-th pose, k = round(1 / ratio).
inline PoseDataset subsample_dataset(PoseDataset d, double ratio) {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw Error("subsample ratio must lie in (0, 1]");
  const auto stride = static_cast<std::size_t>(std::llround(1.0 / ratio));
  std::vector<Pose> kept;
  for (std::size_t i = 0; i < d.poses.size(); i += stride) kept.push_back(std::move(d.poses[i]));
  d.poses = std::move(kept);
  d.subsample_ratio *= ratio;
  return d;
}

inline void validate_dataset(const Skeleton& skel, const PoseDataset& d) {
  for (std::size_t i = 0; i < d.poses.size(); ++i) {
    try {
      validate_pose(skel, d.poses[i]);
    } catch (const Error& e) {
      throw Error("dataset pose " + std::to_string(i) + ": " + e.what());
    }
  }
}

}  // namespace msk
