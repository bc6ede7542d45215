#pragma once

#include <cmath>

#include "nutrunner/types.hpp"

namespace nutrunner {

inline Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(), v.z(), 0.0, -v.x(), -v.y(), v.x(), 0.0;
  return s;
}

// Rotation about a unit axis by angle (Rodrigues).
inline Mat3 axis_angle(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis).toRotationMatrix();
}

// Logarithm of a rotation matrix as a rotation vector (axis * angle).
inline Vec3 so3_log(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

// Geodesic angle between two rotations, in radians.
inline double rotation_angle_between(const Mat3& a, const Mat3& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

// Rigid transform with the rotation stored as a unit quaternion.
struct Pose {
  Eigen::Quaterniond rotation{Eigen::Quaterniond::Identity()};
  Vec3 translation{Vec3::Zero()};

  static Pose Identity() { return {}; }

  Mat3 matrix() const { return rotation.toRotationMatrix(); }

  Pose inverse() const {
    Pose out;
    out.rotation = rotation.conjugate();
    out.translation = -(out.rotation * translation);
    return out;
  }

  Pose operator*(const Pose& rhs) const {
    Pose out;
    out.rotation = rotation * rhs.rotation;
    out.rotation.normalize();
    out.translation = translation + rotation * rhs.translation;
    return out;
  }

  Vec3 operator*(const Vec3& p) const { return translation + rotation * p; }

  // Max deviation of R^T R from identity plus the determinant defect;
  // used by invariants that demand orthonormality to 1e-9.
  double orthonormality_defect() const {
    const Mat3 r = matrix();
    const double ortho = (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
    const double det = std::abs(r.determinant() - 1.0);
    return std::max(ortho, det);
  }
};

inline Pose make_pose(const Mat3& r, const Vec3& t) {
  Pose p;
  p.rotation = Eigen::Quaterniond(r);
  p.rotation.normalize();
  p.translation = t;
  return p;
}

// Relative pose error between a desired and an actual pose:
// rotation as geodesic angle, translation component-wise in world axes.
struct PoseError {
  double rotation_angle{0.0};
  Vec3 translation{Vec3::Zero()};
};

inline PoseError pose_error(const Pose& desired, const Pose& actual) {
  PoseError e;
  e.rotation_angle = rotation_angle_between(desired.matrix(), actual.matrix());
  e.translation = actual.translation - desired.translation;
  return e;
}

// Re-express a wrench (or twist) given in frame A at point p_A into frame B
// at point p_B, where both frames/points are described in world coordinates.
// The moment is shifted to the new reference point and every vector is
// rotated into the destination frame.
inline Wrench transport_wrench(const Wrench& w_a, const Mat3& r_wa, const Vec3& p_a,
                               const Mat3& r_wb, const Vec3& p_b) {
  const Vec3 m_world = r_wa * w_a.head<3>();
  const Vec3 f_world = r_wa * w_a.tail<3>();
  const Vec3 m_shifted = m_world + (p_a - p_b).cross(f_world);
  Wrench out;
  out.head<3>() = r_wb.transpose() * m_shifted;
  out.tail<3>() = r_wb.transpose() * f_world;
  return out;
}

}  // namespace nutrunner
