#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "robomesh/metrics.hpp"

using namespace robomesh;
using oracle::Rng;

namespace {

Points3 random_cloud(Rng& rng, int n, double sd = 0.3) {
  Points3 p(n, 3);
  for (int i = 0; i < n; ++i) p.row(i) = rng.gaussian3(sd).transpose();
  return p;
}

Points3 transform(const Points3& p, double s, const Mat3& R, const Vec3& t) {
  return ((s * p * R.transpose()).rowwise() + t.transpose()).eval();
}

// Nearest-neighbour F-score by brute force.
double f_oracle(const Points3& pred, const Points3& gt, double tau_m) {
  auto frac = [&](const Points3& a, const Points3& b) {
    int hit = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double best = INFINITY;
      for (Eigen::Index j = 0; j < b.rows(); ++j) best = std::min(best, (a.row(i) - b.row(j)).norm());
      hit += best < tau_m;
    }
    return static_cast<double>(hit) / static_cast<double>(a.rows());
  };
  const double p = frac(pred, gt), r = frac(gt, pred);
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

}  // namespace

TEST_CASE("procrustes recovers exact similarities") {
  Rng rng(61);
  for (int i = 0; i < 50; ++i) {
    const Points3 x = random_cloud(rng, rng.integer(3, 40));
    const double s = rng.uniform(0.3, 3.0);
    const Mat3 R = oracle::random_rotation(rng);
    const Vec3 t = rng.gaussian3();
    const AlignmentResult a = procrustes_align(x, transform(x, s, R, t));
    CHECK(std::abs(a.scale - s) < 1e-8);
    CHECK((a.rotation - R).cwiseAbs().maxCoeff() < 1e-8);
    CHECK((a.translation - t).norm() < 1e-8);
    CHECK(a.residual_mm < 1e-9);
  }
}

TEST_CASE("procrustes agrees with Horn's method on noisy data") {
  Rng rng(62);
  for (int i = 0; i < 50; ++i) {
    const Points3 x = random_cloud(rng, 30);
    Points3 y = transform(x, rng.uniform(0.5, 2.0), oracle::random_rotation(rng), rng.gaussian3());
    y += random_cloud(rng, 30, 0.05);
    const AlignmentResult a = procrustes_align(x, y);
    const auto h = oracle::horn(x, y);
    CHECK(std::abs(a.scale - h.scale) < 1e-9);
    CHECK((a.rotation - h.R).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((a.translation - h.t).norm() < 1e-9);
  }
}

TEST_CASE("procrustes never returns a reflection") {
  Rng rng(63);
  for (int i = 0; i < 30; ++i) {
    const Points3 x = random_cloud(rng, 12);
    Mat3 M = oracle::random_rotation(rng);
    M.col(0) *= -1;  // improper target
    const AlignmentResult a = procrustes_align(x, transform(x, 1.0, M, Vec3::Zero()));
    CHECK(a.rotation.determinant() == doctest::Approx(1.0));
    CHECK(a.residual_mm > 0.0);
  }
}

TEST_CASE("procrustes degenerate inputs") {
  Points3 two(2, 3);
  two.setRandom();
  CHECK_THROWS_AS(procrustes_align(two, two), DegenerateError);
  Points3 line(5, 3);
  for (int i = 0; i < 5; ++i) line.row(i) << i, 2 * i, 3 * i;
  CHECK_THROWS_AS(procrustes_align(line, line), DegenerateError);
  Points3 same = Points3::Ones(4, 3);
  CHECK_THROWS_AS(procrustes_align(same, same), DegenerateError);
  CHECK_THROWS_AS(procrustes_align(line, Points3(4, 3)), ShapeError);
}

TEST_CASE("mpjpe and pve are root-aligned millimeters") {
  Points3 gt(3, 3), pr(3, 3);
  gt << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  pr = gt.rowwise() + Eigen::RowVector3d(5, 5, 5);
  CHECK(mpjpe(pr, gt) == doctest::Approx(0.0));
  pr(1, 0) += 0.003;
  CHECK(mpjpe(pr, gt) == doctest::Approx(1.0));
  CHECK(pve(pr, gt, Vec3(5, 5, 5), Vec3::Zero()) == doctest::Approx(1.0));
  CHECK_THROWS_AS(mpjpe(pr, gt, 3), InvariantError);
}

TEST_CASE("procrustes squared error never exceeds the root-aligned one") {
  // Least squares over (s, R, t) includes the root-aligned candidate. Mean
  // distances carry no such guarantee: rare pure-noise pairs invert them.
  Rng rng(64);
  for (int i = 0; i < 200; ++i) {
    const Points3 gt = random_cloud(rng, 17);
    const Points3 pr = gt + random_cloud(rng, 17, 0.02);
    const AlignmentResult a = procrustes_align(pr, gt);
    const Eigen::RowVector3d shift = gt.row(0) - pr.row(0);
    const double pa_sq = (a.apply(pr) - gt).squaredNorm();
    const double root_sq = ((pr.rowwise() + shift) - gt).squaredNorm();
    CHECK(pa_sq <= root_sq + 1e-15);
  }
}

TEST_CASE("pa_mpjpe is below mpjpe for rotated predictions and invariant to similarities") {
  Rng rng(64);
  for (int i = 0; i < 100; ++i) {
    const Points3 gt = random_cloud(rng, 17);
    const Points3 pr = transform(gt, rng.uniform(0.9, 1.1), oracle::exp_series(rng.gaussian3(0.2)), Vec3::Zero()) +
                       random_cloud(rng, 17, 0.02);
    CHECK(pa_mpjpe(pr, gt) <= mpjpe(pr, gt));
    const Points3 moved = transform(pr, rng.uniform(0.5, 2.0), oracle::random_rotation(rng), rng.gaussian3());
    CHECK(pa_mpjpe(moved, gt) == doctest::Approx(pa_mpjpe(pr, gt)).epsilon(1e-8));
  }
}

TEST_CASE("two-hand error averages hands aligned to their own wrists") {
  Rng rng(65);
  const Points3 l = random_cloud(rng, 21), r = random_cloud(rng, 21);
  Points3 lp = l.rowwise() + Eigen::RowVector3d(1, 0, 0);
  Points3 rp = r.rowwise() + Eigen::RowVector3d(0, -2, 0);
  CHECK(two_hand_mpjpe(lp, l, rp, r) == doctest::Approx(0.0).epsilon(1e-9));
  rp(3, 0) += 0.021;
  CHECK(two_hand_mpjpe(lp, l, rp, r) == doctest::Approx(0.5 * (0.0 + 1.0)));
}

TEST_CASE("f-score matches brute force after alignment") {
  Rng rng(66);
  for (int i = 0; i < 30; ++i) {
    const Points3 gt = random_cloud(rng, 60, 0.1);
    Points3 pr = gt + random_cloud(rng, 60, 0.006);
    pr = transform(pr, rng.uniform(0.8, 1.2), oracle::random_rotation(rng), rng.gaussian3());
    const double taus[] = {5.0, 15.0};
    const auto f = f_score(pr, gt, taus);
    const AlignmentResult a = procrustes_align(pr, gt);
    const Points3 al = a.apply(pr);
    CHECK(f[0] == doctest::Approx(f_oracle(al, gt, 0.005)).epsilon(1e-12));
    CHECK(f[1] == doctest::Approx(f_oracle(al, gt, 0.015)).epsilon(1e-12));
    CHECK(f[0] <= f[1]);
  }
  Points3 same = random_cloud(rng, 10);
  const double t[] = {1e-9};
  CHECK(f_score(same, same, t)[0] == 1.0);
}

TEST_CASE("bbox IoU analytic cases") {
  const Bbox a{Vec2(0, 0), 2, 2};
  CHECK(bbox_iou(a, a) == 1.0);
  CHECK(bbox_iou(a, Bbox{Vec2(5, 0), 2, 2}) == 0.0);
  CHECK(bbox_iou(a, Bbox{Vec2(2, 0), 2, 2}) == 0.0);  // touching
  CHECK(bbox_iou(a, Bbox{Vec2(1, 0), 2, 2}) == 1.0 / 3.0);
  CHECK(bbox_iou(a, Bbox{Vec2(0, 0), 1, 1}) == 0.25);
  CHECK(bbox_iou(Bbox{Vec2(0, 0), 0, 0}, Bbox{Vec2(0, 0), 0, 0}) == 0.0);
}
