#include "robomesh/rotation.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <numbers>

namespace robomesh {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 K;
  K << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return K;
}

}  // namespace

Mat3 rodrigues(const Vec3& axis_angle) {
  const double theta2 = axis_angle.squaredNorm();
  const Mat3 K = skew(axis_angle);
  double a;  // sin(t)/t
  double b;  // (1-cos(t))/t^2
  if (theta2 < 1e-8) {
    a = 1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0;
    b = 0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0;
  } else {
    const double theta = std::sqrt(theta2);
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / theta2;
  }
  return Mat3::Identity() + a * K + b * K * K;
}

Vec3 rotation_log(const Mat3& R) {
  // Shepperd's quaternion extraction stays accurate near theta = pi, where the
  // trace-based formula loses precision.
  const double tr = R.trace();
  double w, x, y, z;
  if (tr >= R(0, 0) && tr >= R(1, 1) && tr >= R(2, 2)) {
    const double r = std::sqrt(1.0 + tr);
    w = 0.5 * r;
    const double f = 0.5 / r;
    x = (R(2, 1) - R(1, 2)) * f;
    y = (R(0, 2) - R(2, 0)) * f;
    z = (R(1, 0) - R(0, 1)) * f;
  } else if (R(0, 0) >= R(1, 1) && R(0, 0) >= R(2, 2)) {
    const double r = std::sqrt(1.0 + R(0, 0) - R(1, 1) - R(2, 2));
    x = 0.5 * r;
    const double f = 0.5 / r;
    w = (R(2, 1) - R(1, 2)) * f;
    y = (R(0, 1) + R(1, 0)) * f;
    z = (R(0, 2) + R(2, 0)) * f;
  } else if (R(1, 1) >= R(2, 2)) {
    const double r = std::sqrt(1.0 - R(0, 0) + R(1, 1) - R(2, 2));
    y = 0.5 * r;
    const double f = 0.5 / r;
    w = (R(0, 2) - R(2, 0)) * f;
    x = (R(0, 1) + R(1, 0)) * f;
    z = (R(1, 2) + R(2, 1)) * f;
  } else {
    const double r = std::sqrt(1.0 - R(0, 0) - R(1, 1) + R(2, 2));
    z = 0.5 * r;
    const double f = 0.5 / r;
    w = (R(1, 0) - R(0, 1)) * f;
    x = (R(0, 2) + R(2, 0)) * f;
    y = (R(1, 2) + R(2, 1)) * f;
  }
  if (w < 0.0) {
    w = -w;
    x = -x;
    y = -y;
    z = -z;
  }
  const Vec3 qv(x, y, z);
  const double s = qv.norm();
  if (s < 1e-12) {
    // theta ~ 2 s; first-order term of the series.
    return 2.0 * qv / w;
  }
  const double theta = 2.0 * std::atan2(s, w);
  return qv * (theta / s);
}

Vec3 canonicalize_axis_angle(const Vec3& axis_angle) {
  constexpr double kPi = std::numbers::pi;
  const double theta = axis_angle.norm();
  if (theta <= kPi) {
    return axis_angle;
  }
  double wrapped = std::fmod(theta, 2.0 * kPi);
  if (wrapped > kPi) {
    wrapped -= 2.0 * kPi;
  }
  return axis_angle * (wrapped / theta);
}

Rot6d rotmat_to_rot6d(const Mat3& R) {
  return {R(0, 0), R(1, 0), R(2, 0), R(0, 1), R(1, 1), R(2, 1)};
}

Mat3 rot6d_to_rotmat(const Rot6d& v) {
  const Vec3 a1(v[0], v[1], v[2]);
  const Vec3 a2(v[3], v[4], v[5]);
  const double n1 = a1.norm();
  const double n2 = a2.norm();
  if (!(n1 > 1e-12) || !(n2 > 1e-12)) {
    throw DegenerateError("rot6d_to_rotmat: zero-length column");
  }
  const Vec3 b1 = a1 / n1;
  const Vec3 rem = a2 - b1.dot(a2) * b1;
  const double nr = rem.norm();
  if (!(nr > 1e-9 * n2)) {
    throw DegenerateError("rot6d_to_rotmat: columns are parallel, rotation is not recoverable");
  }
  const Vec3 b2 = rem / nr;
  Mat3 R;
  R.col(0) = b1;
  R.col(1) = b2;
  R.col(2) = b1.cross(b2);
  return R;
}

Mat3 rotation_about_z(double angle) {
  Mat3 R = Mat3::Identity();
  R.topLeftCorner<2, 2>() = rotation_2d(angle);
  return R;
}

Mat2 rotation_2d(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat2 R;
  R << c, -s, s, c;
  return R;
}

}  // namespace robomesh
