#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace msk {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using Transform = Eigen::Isometry3d;

inline constexpr double kPi = std::numbers::pi;

/// Thrown for malformed input: unknown ids, violated type invariants, bad files.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline double deg2rad(double d) { return d * kPi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / kPi; }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

/// Rotation by |v| radians about v/|v|.
inline Quat quat_exp(const Vec3& v) {
  const double angle = v.norm();
  if (angle < 1e-300) return Quat::Identity();
  return Quat(Eigen::AngleAxisd(angle, v / angle));
}

inline Quat axis_angle(const Vec3& axis, double angle) {
  return Quat(Eigen::AngleAxisd(angle, axis.normalized()));
}

/// Any unit vector orthogonal to `v` (deterministic).
inline Vec3 any_orthogonal(const Vec3& v) {
  const Vec3 n = v.normalized();
  const Vec3 helper = std::abs(n.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return n.cross(helper).normalized();
}

/// Minimal-arc rotation taking unit vector `from` onto unit vector `to`.
/// Antipodal inputs rotate by pi about any_orthogonal(from).
inline Quat minimal_arc(const Vec3& from, const Vec3& to) {
  const double d = from.dot(to);
  if (d < -1.0 + 1e-12) return Quat(Eigen::AngleAxisd(kPi, any_orthogonal(from)));
  const Vec3 c = from.cross(to);
  Quat q(1.0 + d, c.x(), c.y(), c.z());
  q.normalize();
  return q;
}

inline Transform make_transform(const Quat& rotation, const Vec3& translation) {
  Transform t = Transform::Identity();
  t.linear() = rotation.toRotationMatrix();
  t.translation() = translation;
  return t;
}

inline bool is_unit(const Quat& q, double tol = 1e-9) { return std::abs(q.norm() - 1.0) <= tol; }

}  // namespace msk
