#pragma once

#include <array>

#include "robomesh/types.hpp"

namespace robomesh {

using Rot6d = std::array<double, 6>;

/// Exponential map from axis-angle (radians) to a rotation matrix.
Mat3 rodrigues(const Vec3& axis_angle);

/// Logarithm of a rotation matrix. The result has norm in [0, pi].
Vec3 rotation_log(const Mat3& R);

/// Wraps an axis-angle vector so its norm lies in [0, pi] while describing the same rotation.
Vec3 canonicalize_axis_angle(const Vec3& axis_angle);

/// First two columns of R, column-major: (R00, R10, R20, R01, R11, R21).
Rot6d rotmat_to_rot6d(const Mat3& R);

/// Gram-Schmidt reconstruction. Throws DegenerateError when the columns are
/// (numerically) zero or parallel.
Mat3 rot6d_to_rotmat(const Rot6d& v);

/// Rotation about the camera's optical (z) axis.
Mat3 rotation_about_z(double angle);
Mat2 rotation_2d(double angle);

}  // namespace robomesh
