#pragma once

#include "msk/core/math.hpp"

namespace msk {

struct JointDecomposition {
  double twist = 0.0;             // omega, radians in (-pi, pi]
  Vec3 cone_dir = Vec3::UnitZ();  // v_hat, unit
};

/// q = conic(v_hat) * twist(omega), where twist rotates about `shaft` and conic is
/// the minimal arc from `shaft` to v_hat. When v_hat = -shaft the conic part is a
/// half turn about any_orthogonal(shaft).
inline JointDecomposition decompose_rotation(const Quat& q, const Vec3& shaft) {
  if (!is_unit(q, 1e-6)) throw Error("decompose_rotation: quaternion is not unit");
  const Vec3 s = shaft.normalized();
  JointDecomposition d;
  d.cone_dir = (q * s).normalized();
  const Quat twist = minimal_arc(s, d.cone_dir).conjugate() * q;
  d.twist = wrap_angle(2.0 * std::atan2(twist.vec().dot(s), twist.w()));
  return d;
}

inline Quat recompose_rotation(const JointDecomposition& d, const Vec3& shaft) {
  const Vec3 s = shaft.normalized();
  return (minimal_arc(s, d.cone_dir.normalized()) * axis_angle(s, d.twist)).normalized();
}

/// Polar angle of `v` about `center` and its azimuth in the frame
/// (e1, e2) = (any_orthogonal(center), center x e1).
struct ConeCoords {
  double polar = 0.0;
  double azimuth = 0.0;
};

inline ConeCoords cone_coords(const Vec3& v, const Vec3& center) {
  const Vec3 c = center.normalized();
  const Vec3 e1 = any_orthogonal(c);
  const Vec3 e2 = c.cross(e1);
  const Vec3 u = v.normalized();
  ConeCoords cc;
  cc.polar = std::atan2(u.cross(c).norm(), u.dot(c));
  cc.azimuth = std::atan2(u.dot(e2), u.dot(e1));
  if (cc.azimuth < 0.0) cc.azimuth += 2.0 * kPi;
  return cc;
}

inline Vec3 cone_direction(const ConeCoords& cc, const Vec3& center) {
  const Vec3 c = center.normalized();
  const Vec3 e1 = any_orthogonal(c);
  const Vec3 e2 = c.cross(e1);
  return std::cos(cc.polar) * c + std::sin(cc.polar) * (std::cos(cc.azimuth) * e1 + std::sin(cc.azimuth) * e2);
}

}  // namespace msk
