#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "robomesh/rotation.hpp"

using namespace robomesh;
using oracle::Rng;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("rodrigues agrees with the matrix exponential series") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec3 w = rng.gaussian3(1.2);
    CHECK((rodrigues(w) - oracle::exp_series(w)).cwiseAbs().maxCoeff() < 1e-12);
  }
  // tiny angles go through the series branch
  for (double a : {1e-3, 1e-6, 1e-9, 1e-14, 0.0}) {
    const Vec3 w = Vec3(0.3, -0.5, 0.8).normalized() * a;
    CHECK((rodrigues(w) - oracle::exp_series(w)).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("rodrigues output is a proper rotation") {
  Rng rng(12);
  for (int i = 0; i < 100; ++i) {
    const Mat3 R = rodrigues(rng.gaussian3(2.0));
    CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(R.determinant() == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("rotation_log inverts rodrigues on the principal branch") {
  Rng rng(13);
  for (int i = 0; i < 500; ++i) {
    Vec3 w = rng.gaussian3();
    w *= rng.uniform(0.0, kPi - 1e-6) / w.norm();
    CHECK((rotation_log(rodrigues(w)) - w).norm() < 1e-9);
  }
  CHECK(rotation_log(Mat3::Identity()).norm() == 0.0);
  for (double a : {1e-8, 1e-4, kPi - 1e-4, kPi - 1e-7}) {
    const Vec3 w = Vec3(-0.2, 0.9, 0.4).normalized() * a;
    CHECK((rodrigues(rotation_log(rodrigues(w))) - rodrigues(w)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("rotation_log at exactly pi returns an axis of the right length") {
  for (const Vec3 axis : {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1), Vec3(1, 1, 1).normalized()}) {
    const Mat3 R = rodrigues(axis * kPi);
    const Vec3 w = rotation_log(R);
    CHECK(w.norm() == doctest::Approx(kPi).epsilon(1e-9));
    CHECK((rodrigues(w) - R).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("canonicalize_axis_angle keeps the rotation and bounds the norm") {
  Rng rng(14);
  for (int i = 0; i < 200; ++i) {
    const Vec3 w = rng.gaussian3(4.0);
    const Vec3 c = canonicalize_axis_angle(w);
    CHECK(c.norm() <= kPi + 1e-12);
    CHECK((rodrigues(c) - rodrigues(w)).cwiseAbs().maxCoeff() < 1e-9);
  }
  const Vec3 small(0.1, 0.2, -0.3);
  CHECK(canonicalize_axis_angle(small) == small);
}

TEST_CASE("rot6d round trip and layout") {
  Rng rng(15);
  for (int i = 0; i < 200; ++i) {
    const Mat3 R = oracle::random_rotation(rng);
    const Rot6d v = rotmat_to_rot6d(R);
    CHECK(v[0] == R(0, 0));
    CHECK(v[1] == R(1, 0));
    CHECK(v[2] == R(2, 0));
    CHECK(v[3] == R(0, 1));
    CHECK(v[4] == R(1, 1));
    CHECK(v[5] == R(2, 1));
    CHECK((rot6d_to_rotmat(v) - R).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("rot6d_to_rotmat orthonormalizes arbitrary input") {
  Rng rng(16);
  for (int i = 0; i < 100; ++i) {
    Rot6d v;
    for (auto& x : v) x = rng.normal();
    const Mat3 R = rot6d_to_rotmat(v);
    CHECK((R.transpose() * R - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(R.determinant() == doctest::Approx(1.0));
    // first column is the normalized first input column
    CHECK((R.col(0) - Vec3(v[0], v[1], v[2]).normalized()).norm() < 1e-12);
  }
}

TEST_CASE("rot6d_to_rotmat rejects degenerate input") {
  CHECK_THROWS_AS(rot6d_to_rotmat({0, 0, 0, 0, 1, 0}), DegenerateError);
  CHECK_THROWS_AS(rot6d_to_rotmat({1, 2, 3, 2, 4, 6}), DegenerateError);
  CHECK_THROWS_AS(rot6d_to_rotmat({1, 0, 0, 0, 0, 0}), DegenerateError);
}

TEST_CASE("planar rotations") {
  const double a = 0.7;
  const Mat3 Rz = rotation_about_z(a);
  CHECK((Rz - rodrigues(Vec3(0, 0, a))).cwiseAbs().maxCoeff() < 1e-15);
  const Mat2 R2 = rotation_2d(a);
  CHECK((R2 - Rz.topLeftCorner<2, 2>()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(rotation_2d(kPi / 2)(1, 0) == doctest::Approx(1.0));
}
