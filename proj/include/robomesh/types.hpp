#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace robomesh {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;

// One point per row.
using Points2 = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using Points3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Faces = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched tensor dimensions between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A value violates a documented invariant (weights not summing to one, bad label, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

// Geometry that has no well-defined answer (collinear point sets, parallel 6D columns).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace robomesh
