#pragma once

#include "msk/core/math.hpp"

#include <Eigen/Cholesky>

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msk {

enum class JointType { revolute, ball_and_socket, free_root };

inline std::string_view to_string(JointType t) {
  switch (t) {
    case JointType::revolute: return "revolute";
    case JointType::ball_and_socket: return "ball_and_socket";
    case JointType::free_root: return "free_root";
  }
  return "?";
}

inline JointType joint_type_from_string(std::string_view s) {
  if (s == "revolute") return JointType::revolute;
  if (s == "ball_and_socket") return JointType::ball_and_socket;
  if (s == "free_root") return JointType::free_root;
  throw Error("unknown joint type '" + std::string(s) + "'");
}

/// Deformation state of a bone relative to the reference skeleton.
struct ShapeParams {
  double proximal_head_scale = 1.0;
  double distal_head_scale = 1.0;
  double elongation = 1.0;
  double torsion_angle = 0.0;  // radians about the shaft axis, full at the distal end
  double scale = 1.0;          // uniform factor (global size, hands/feet)

  bool identity() const {
    return proximal_head_scale == 1.0 && distal_head_scale == 1.0 && elongation == 1.0 && torsion_angle == 0.0 &&
           scale == 1.0;
  }
  bool operator==(const ShapeParams&) const = default;
};

// A bone's frame sits at its proximal joint. The child frame is
//   parent * translate(local_offset) * rest_rotation * joint_rotation(q).
struct Bone {
  std::string id;
  std::string joint;   // joint name; defaults to the bone id
  std::string parent;  // empty for the root
  JointType joint_type = JointType::ball_and_socket;
  Vec3 local_offset = Vec3::Zero();
  Quat rest_rotation = Quat::Identity();
  Vec3 joint_axis = Vec3::UnitX();  // revolute only, joint frame
  Vec3 shaft_axis = -Vec3::UnitZ();
  double shaft_length = 0.0;
  double mass = 1.0;
  Vec3 com = Vec3::Zero();               // bone frame
  Mat3 inertia = Mat3::Identity() * 1e-3;  // about com, bone frame
  ShapeParams shape;
};

/// Per-joint generalized coordinate. Revolute joints use `angle`, ball joints `rotation`.
struct JointCoord {
  double angle = 0.0;
  Quat rotation = Quat::Identity();
};

struct Pose {
  Quat root_rotation = Quat::Identity();
  Vec3 root_translation = Vec3::Zero();
  std::vector<JointCoord> joints;  // indexed like Skeleton::bones(); root entry unused
};

class Skeleton {
public:
  Skeleton() = default;

  /// Validates the bone list and orders it so every parent precedes its children.
  explicit Skeleton(std::vector<Bone> bones) {
    int roots = 0;
    std::map<std::string, const Bone*> by_id;
    for (auto& b : bones) {
      if (b.joint.empty()) b.joint = b.id;
      if (!by_id.emplace(b.id, &b).second) throw Error("duplicate bone id '" + b.id + "'");
      if (b.joint_type == JointType::free_root) ++roots;
    }
    if (roots != 1) throw Error("skeleton must have exactly one free_root bone, found " + std::to_string(roots));
    for (const auto& b : bones) {
      const bool is_root = b.joint_type == JointType::free_root;
      if (is_root != b.parent.empty())
        throw Error("bone '" + b.id + "': only the free_root bone may (and must) lack a parent");
      if (!is_root && !by_id.count(b.parent))
        throw Error("bone '" + b.id + "': unknown parent '" + b.parent + "'");
      if (!(b.mass > 0.0)) throw Error("bone '" + b.id + "': mass must be positive");
      if (!b.inertia.isApprox(b.inertia.transpose(), 1e-12) || b.inertia.llt().info() != Eigen::Success)
        throw Error("bone '" + b.id + "': inertia must be symmetric positive-definite");
      if (std::abs(b.shaft_axis.norm() - 1.0) > 1e-9) throw Error("bone '" + b.id + "': shaft_axis must be unit");
      if (b.joint_type == JointType::revolute && std::abs(b.joint_axis.norm() - 1.0) > 1e-9)
        throw Error("bone '" + b.id + "': joint_axis must be unit");
      if (!is_unit(b.rest_rotation)) throw Error("bone '" + b.id + "': rest_rotation must be unit");
    }
    // Topological order, stable with respect to the input order.
    std::vector<bool> placed(bones.size(), false);
    std::map<std::string, bool> done;
    while (bones_.size() < bones.size()) {
      bool progress = false;
      for (std::size_t i = 0; i < bones.size(); ++i) {
        if (placed[i]) continue;
        if (bones[i].parent.empty() || done.count(bones[i].parent)) {
          bones_.push_back(bones[i]);
          done[bones[i].id] = true;
          placed[i] = true;
          progress = true;
        }
      }
      if (!progress) throw Error("bone parent graph is not a tree (cycle detected)");
    }
    int offset = 0;
    for (std::size_t i = 0; i < bones_.size(); ++i) {
      index_[bones_[i].id] = static_cast<int>(i);
      parent_.push_back(bones_[i].parent.empty() ? -1 : index_.at(bones_[i].parent));
      dof_offset_.push_back(offset);
      offset += dof_width(bones_[i].joint_type);
    }
    dof_count_ = offset;
  }

  static int dof_width(JointType t) {
    switch (t) {
      case JointType::revolute: return 1;
      case JointType::ball_and_socket: return 3;
      case JointType::free_root: return 6;
    }
    return 0;
  }

  const std::vector<Bone>& bones() const { return bones_; }
  const Bone& bone(int i) const { return bones_.at(static_cast<std::size_t>(i)); }
  Bone& mutable_bone(int i) { return bones_.at(static_cast<std::size_t>(i)); }
  int size() const { return static_cast<int>(bones_.size()); }
  int parent(int i) const { return parent_[static_cast<std::size_t>(i)]; }
  int dof_count() const { return dof_count_; }
  int dof_offset(int i) const { return dof_offset_[static_cast<std::size_t>(i)]; }
  int dof_width(int i) const { return dof_width(bones_[static_cast<std::size_t>(i)].joint_type); }

  std::optional<int> find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  int index_of(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw Error("unknown bone id '" + std::string(id) + "'");
  }

  /// Looks a joint up by joint name or by the id of the bone it drives.
  int joint_index(std::string_view name) const {
    if (auto i = find(name)) return *i;
    for (int i = 0; i < size(); ++i)
      if (bones_[static_cast<std::size_t>(i)].joint == name) return i;
    throw Error("unknown joint '" + std::string(name) + "'");
  }

  /// True when `ancestor` is `bone` or lies on the path from `bone` to the root.
  bool is_ancestor(int ancestor, int bone) const {
    for (int b = bone; b >= 0; b = parent(b))
      if (b == ancestor) return true;
    return false;
  }

  Pose rest_pose() const {
    Pose p;
    p.joints.resize(bones_.size());
    return p;
  }

private:
  std::vector<Bone> bones_;
  std::map<std::string, int, std::less<>> index_;
  std::vector<int> parent_;
  std::vector<int> dof_offset_;
  int dof_count_ = 0;
};

inline void validate_pose(const Skeleton& skel, const Pose& pose) {
  if (pose.joints.size() != static_cast<std::size_t>(skel.size()))
    throw Error("pose has " + std::to_string(pose.joints.size()) + " joint entries, skeleton has " +
                std::to_string(skel.size()) + " bones");
  if (!is_unit(pose.root_rotation, 1e-6)) throw Error("pose root rotation is not a unit quaternion");
  for (int i = 0; i < skel.size(); ++i) {
    const auto& c = pose.joints[static_cast<std::size_t>(i)];
    const auto& b = skel.bone(i);
    if (b.joint_type == JointType::ball_and_socket && !is_unit(c.rotation, 1e-6))
      throw Error("pose: joint '" + b.joint + "' rotation is not a unit quaternion");
    if (b.joint_type == JointType::revolute && !std::isfinite(c.angle))
      throw Error("pose: joint '" + b.joint + "' angle is not finite");
  }
}

/// Rotation contributed by the joint coordinate of bone `i` (identity for the root).
inline Quat joint_rotation(const Bone& b, const JointCoord& c) {
  switch (b.joint_type) {
    case JointType::revolute: return Quat(Eigen::AngleAxisd(c.angle, b.joint_axis));
    case JointType::ball_and_socket: return c.rotation;
    case JointType::free_root: return Quat::Identity();
  }
  return Quat::Identity();
}

/// World transform of every bone frame.
inline std::vector<Transform> world_transforms(const Skeleton& skel, const Pose& pose) {
  std::vector<Transform> world(static_cast<std::size_t>(skel.size()));
  for (int i = 0; i < skel.size(); ++i) {
    const Bone& b = skel.bone(i);
    const auto ui = static_cast<std::size_t>(i);
    if (b.joint_type == JointType::free_root) {
      world[ui] = make_transform(pose.root_rotation, pose.root_translation);
      continue;
    }
    const Transform local = make_transform(b.rest_rotation * joint_rotation(b, pose.joints[ui]), b.local_offset);
    world[ui] = world[static_cast<std::size_t>(skel.parent(i))] * local;
  }
  return world;
}

inline Transform bone_world_transform(const Skeleton& skel, const Pose& pose, std::string_view bone) {
  const int target = skel.index_of(bone);
  validate_pose(skel, pose);
  return world_transforms(skel, pose)[static_cast<std::size_t>(target)];
}

/// Configuration update along a generalized velocity `dq` (one unit of time).
/// Root: body-frame angular then linear velocity; ball joints: child-frame
/// angular velocity; revolute joints: angle rate.
inline Pose integrate(const Skeleton& skel, const Pose& pose, const VecX& dq) {
  Pose out = pose;
  for (int i = 0; i < skel.size(); ++i) {
    const Bone& b = skel.bone(i);
    const int o = skel.dof_offset(i);
    auto& c = out.joints[static_cast<std::size_t>(i)];
    switch (b.joint_type) {
      case JointType::free_root:
        out.root_translation += pose.root_rotation * dq.segment<3>(o + 3);
        out.root_rotation = (pose.root_rotation * quat_exp(dq.segment<3>(o))).normalized();
        break;
      case JointType::ball_and_socket: c.rotation = (c.rotation * quat_exp(dq.segment<3>(o))).normalized(); break;
      case JointType::revolute: c.angle += dq[o]; break;
    }
  }
  return out;
}

}  // namespace msk
