#include <doctest.h>

#include <numbers>

#include "oracles.hpp"
#include "robomesh/camera.hpp"
#include "robomesh/rotation.hpp"

using namespace robomesh;
using oracle::Rng;

namespace {

AffineMap random_similarity(Rng& rng) {
  AffineMap a;
  a.A = rng.uniform(0.6, 1.6) * rotation_2d(rng.uniform(-1.2, 1.2));
  a.b = Vec2(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
  return a;
}

}  // namespace

TEST_CASE("weak-perspective projection") {
  Points3 X(2, 3);
  X << 1, 2, 3, -0.5, 0.25, 7;
  const Points2 p = project(X, Camera{2.0, Vec2(0.1, -0.2)});
  CHECK(p(0, 0) == doctest::Approx(2.1));
  CHECK(p(0, 1) == doctest::Approx(3.8));
  CHECK(p(1, 0) == doctest::Approx(-0.9));
  CHECK(p(1, 1) == doctest::Approx(0.3));
}

TEST_CASE("perspective projection tends to weak perspective for shallow bodies") {
  Rng rng(31);
  Points3 X(20, 3);
  for (int i = 0; i < 20; ++i) X.row(i) = rng.gaussian3(0.2).transpose();
  const Camera cam{1.1, Vec2(0.05, -0.02)};
  ProjectionConfig far;
  far.kind = ProjectionKind::perspective;
  far.focal = 1e7;
  CHECK((project(X, cam, far) - project(X, cam)).cwiseAbs().maxCoeff() < 1e-5);
  // depth-free points project exactly
  Points3 flat = X;
  flat.col(2).setZero();
  ProjectionConfig persp;
  persp.kind = ProjectionKind::perspective;
  CHECK((project(flat, cam, persp) - project(flat, cam)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("pixel conversion: y flips and the crop spans the image") {
  Points2 corners(3, 2);
  corners << -1, 1, 1, -1, 0, 0;
  const Points2 px = normalized_to_pixels(corners, 64, 32);
  CHECK(px(0, 0) == 0.0);
  CHECK(px(0, 1) == 0.0);
  CHECK(px(1, 0) == 64.0);
  CHECK(px(1, 1) == 32.0);
  CHECK(px(2, 0) == 32.0);
  CHECK(px(2, 1) == 16.0);
  Rng rng(32);
  Points2 r(50, 2);
  for (int i = 0; i < 50; ++i) r.row(i) << rng.uniform(-2, 2), rng.uniform(-2, 2);
  CHECK((pixels_to_normalized(normalized_to_pixels(r, 48, 80), 48, 80) - r).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("derive_part_bbox: mean center and padded range") {
  Points2 k(4, 2);
  k << 0, 0, 10, 0, 10, 4, 0, 4;
  Bbox b = derive_part_bbox(k, 0.0);
  CHECK(b.center == Vec2(5, 2));
  CHECK(b.w == 10.0);
  CHECK(b.h == 4.0);
  b = derive_part_bbox(k, 0.5);
  CHECK(b.w == 15.0);
  CHECK(b.h == 6.0);
  b = derive_part_bbox(k, 0.5, true);
  CHECK(b.w == 15.0);
  CHECK(b.h == 15.0);
  // center is the mean, not the range midpoint
  Points2 skew(3, 2);
  skew << 0, 0, 0, 0, 6, 3;
  b = derive_part_bbox(skew, 0.0);
  CHECK(b.center == Vec2(2, 1));
  CHECK(b.w == 6.0);
  CHECK(b.h == 3.0);

  CHECK_THROWS_AS(derive_part_bbox(Points2(1, 2), 0.2), DegenerateError);
  Points2 same(3, 2);
  same << 1, 1, 1, 1, 1, 1;
  CHECK_THROWS_AS(derive_part_bbox(same, 0.2), DegenerateError);
}

TEST_CASE("crop_affine maps the box to [-1, 1]^2 with y up") {
  const Bbox b{Vec2(30, 20), 40, 10};
  const AffineMap a = crop_affine(b, 100, 80);
  CHECK((a.apply(Vec2(10, 15)) - Vec2(-1, 1)).norm() < 1e-15);
  CHECK((a.apply(Vec2(50, 25)) - Vec2(1, -1)).norm() < 1e-15);
  CHECK(a.apply(Vec2(30, 20)).norm() < 1e-15);
}

TEST_CASE("affine algebra") {
  Rng rng(33);
  for (int i = 0; i < 50; ++i) {
    const AffineMap f = random_similarity(rng), g = random_similarity(rng);
    const Vec2 p(rng.normal(), rng.normal());
    CHECK((f.after(g).apply(p) - f.apply(g.apply(p))).norm() < 1e-12);
    CHECK((f.inverse().apply(f.apply(p)) - p).norm() < 1e-12);
  }
  CHECK(AffineMap::identity().is_identity());
  AffineMap sing;
  sing.A << 1, 2, 2, 4;
  CHECK_THROWS_AS(sing.inverse(), DegenerateError);
}

TEST_CASE("decompose_similarity recovers its parts and rejects shear") {
  Rng rng(34);
  for (int i = 0; i < 50; ++i) {
    const double s = rng.uniform(0.5, 2.0), ang = rng.uniform(-3.0, 3.0);
    AffineMap a;
    a.A = s * rotation_2d(ang);
    a.b = Vec2(rng.normal(), rng.normal());
    const Similarity d = decompose_similarity(a);
    CHECK(d.scale == doctest::Approx(s).epsilon(1e-12));
    CHECK(d.angle == doctest::Approx(ang).epsilon(1e-12));
    CHECK(d.offset == a.b);
  }
  AffineMap shear;
  shear.A << 1, 0.2, 0, 1;
  CHECK_THROWS_AS(decompose_similarity(shear), InvariantError);
  AffineMap reflect;
  reflect.A << -1, 0, 0, 1;
  CHECK_THROWS_AS(decompose_similarity(reflect), InvariantError);
  AffineMap aniso;
  aniso.A << 2, 0, 0, 1;
  CHECK_THROWS_AS(decompose_similarity(aniso), InvariantError);
}

TEST_CASE("co_update keeps projections consistent with the affine") {
  Rng rng(35);
  for (int i = 0; i < 200; ++i) {
    Points3 X(15, 3);
    for (int k = 0; k < 15; ++k) X.row(k) = rng.gaussian3(0.3).transpose();
    const Vec3 go = rng.gaussian3(0.7);
    const Camera cam{rng.uniform(0.8, 1.2), Vec2(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))};
    const AffineMap aff = random_similarity(rng);

    // body seen under the original orientation
    const Points3 body = X * rodrigues(go).transpose();
    const CameraOrient up = co_update(cam, go, aff);
    const Points3 body2 = X * rodrigues(up.global_orient).transpose();
    const Points2 lhs = aff.apply(project(body, cam));
    const Points2 rhs = project(body2, up.camera);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("co_update with the identity is bit-exact and pure translation keeps orientation") {
  const Camera cam{1.07, Vec2(0.03, -0.01)};
  const Vec3 go(0.4, -2.9, 0.3);
  const CameraOrient same = co_update(cam, go, AffineMap::identity());
  CHECK(same.camera == cam);
  CHECK(same.global_orient == go);
  AffineMap shift;
  shift.b = Vec2(0.2, 0.0);
  const CameraOrient moved = co_update(cam, go, shift);
  CHECK(moved.global_orient == go);
  CHECK(moved.camera.s == cam.s);
  CHECK(moved.camera.t == cam.t + shift.b);
}
