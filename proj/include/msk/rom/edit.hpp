#pragma once

#include "msk/rom/decomposition.hpp"
#include "msk/rom/validity.hpp"

#include <map>
#include <variant>

namespace msk {

/// theta' = scale (theta - center) + center + shift
struct RevoluteEdit {
  double scale = 1.0;
  double shift = 0.0;
  double center = 0.0;

  bool operator==(const RevoluteEdit&) const = default;
};

/// Twist is scaled/shifted like a revolute coordinate. The cone direction's
/// polar angle about `cone_center` (joint frame) is multiplied by `cone_scale`,
/// then the result is rotated by `re_aim`.
struct BallEdit {
  double twist_scale = 1.0;
  double twist_shift = 0.0;
  double twist_center = 0.0;
  double cone_scale = 1.0;
  Vec3 cone_center = -Vec3::UnitZ();
  Quat re_aim = Quat::Identity();

  bool operator==(const BallEdit& o) const {
    return twist_scale == o.twist_scale && twist_shift == o.twist_shift && twist_center == o.twist_center &&
           cone_scale == o.cone_scale && cone_center == o.cone_center && re_aim.coeffs() == o.re_aim.coeffs();
  }
};

using JointEdit = std::variant<RevoluteEdit, BallEdit>;

/// Per-joint pose transform T; the edited validity is V(T(q)).
struct RomEdit {
  std::map<std::string, JointEdit> joints;  // keyed by joint name or bone id

  bool empty() const { return joints.empty(); }
};

inline void validate_edit(const Skeleton& skel, const RomEdit& edit) {
  for (const auto& [name, je] : edit.joints) {
    const int j = skel.joint_index(name);
    const auto type = skel.bone(j).joint_type;
    if (const auto* r = std::get_if<RevoluteEdit>(&je)) {
      if (type != JointType::revolute) throw Error("rom edit: joint '" + name + "' is not revolute");
      if (!(r->scale > 0.0)) throw Error("rom edit: joint '" + name + "' scale must be positive");
    } else {
      const auto& b = std::get<BallEdit>(je);
      if (type != JointType::ball_and_socket) throw Error("rom edit: joint '" + name + "' is not ball_and_socket");
      if (!(b.twist_scale > 0.0)) throw Error("rom edit: joint '" + name + "' twist scale must be positive");
      if (!(b.cone_scale > 0.0)) throw Error("rom edit: joint '" + name + "' cone scale must be positive");
      if (!(b.cone_center.norm() > 0.0)) throw Error("rom edit: joint '" + name + "' cone center is zero");
      if (!is_unit(b.re_aim, 1e-6)) throw Error("rom edit: joint '" + name + "' re-aim is not a unit quaternion");
    }
  }
}

namespace detail {

inline double apply_scalar_edit(double x, double scale, double shift, double center) {
  return scale * (x - center) + center + shift;
}

inline double invert_scalar_edit(double y, double scale, double shift, double center) {
  return (y - center - shift) / scale + center;
}

inline Quat apply_ball_edit(const BallEdit& e, const Quat& q, const Vec3& shaft) {
  auto d = decompose_rotation(q, shaft);
  d.twist = wrap_angle(apply_scalar_edit(d.twist, e.twist_scale, e.twist_shift, e.twist_center));
  auto cc = cone_coords(d.cone_dir, e.cone_center);
  cc.polar = std::min(kPi, e.cone_scale * cc.polar);
  d.cone_dir = (e.re_aim * cone_direction(cc, e.cone_center)).normalized();
  return recompose_rotation(d, shaft);
}

inline Quat invert_ball_edit(const BallEdit& e, const Quat& q, const Vec3& shaft) {
  auto d = decompose_rotation(q, shaft);
  d.twist = wrap_angle(invert_scalar_edit(d.twist, e.twist_scale, e.twist_shift, e.twist_center));
  auto cc = cone_coords(e.re_aim.conjugate() * d.cone_dir, e.cone_center);
  cc.polar = std::min(kPi, cc.polar / e.cone_scale);
  d.cone_dir = cone_direction(cc, e.cone_center);
  return recompose_rotation(d, shaft);
}

template <bool Inverse>
Pose transform_pose(const Skeleton& skel, const RomEdit& edit, Pose pose) {
  for (const auto& [name, je] : edit.joints) {
    const int j = skel.joint_index(name);
    auto& c = pose.joints[static_cast<std::size_t>(j)];
    if (const auto* r = std::get_if<RevoluteEdit>(&je)) {
      c.angle = Inverse ? invert_scalar_edit(c.angle, r->scale, r->shift, r->center)
                        : apply_scalar_edit(c.angle, r->scale, r->shift, r->center);
    } else {
      const auto& b = std::get<BallEdit>(je);
      const Vec3& shaft = skel.bone(j).shaft_axis;
      c.rotation = Inverse ? invert_ball_edit(b, c.rotation, shaft) : apply_ball_edit(b, c.rotation, shaft);
    }
  }
  return pose;
}

}  // namespace detail

/// T(q). Joints without an entry are untouched.
inline Pose apply_rom_edit(const Skeleton& skel, const RomEdit& edit, const Pose& pose) {
  validate_edit(skel, edit);
  validate_pose(skel, pose);
  return detail::transform_pose<false>(skel, edit, pose);
}

/// T^-1(q); exact except where the cone scaling saturates at a half turn.
inline Pose invert_rom_edit(const Skeleton& skel, const RomEdit& edit, const Pose& pose) {
  validate_edit(skel, edit);
  validate_pose(skel, pose);
  return detail::transform_pose<true>(skel, edit, pose);
}

inline bool edited_is_valid(const Model& model, const RomEdit& edit, const Pose& pose) {
  return is_valid(model, apply_rom_edit(model.skeleton, edit, pose));
}

/// The tilt-and-shrink cone edit: the target cone is the reference cone
/// (about `reference_center`) tilted by `tilt` radians about `tilt_axis` and
/// narrowed by `shrink`. T maps the target cone back onto the reference one.
inline BallEdit tilt_and_shrink_edit(const Vec3& reference_center, const Vec3& tilt_axis, double tilt, double shrink) {
  if (!(shrink > 0.0)) throw Error("tilt_and_shrink_edit: shrink must be positive");
  BallEdit e;
  e.cone_center = (axis_angle(tilt_axis, tilt) * reference_center.normalized()).normalized();
  e.cone_scale = 1.0 / shrink;
  e.re_aim = axis_angle(tilt_axis, -tilt);
  return e;
}

}  // namespace msk
