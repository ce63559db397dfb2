#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "robomesh/localization.hpp"

using namespace robomesh;
using oracle::Rng;

TEST_CASE("soft-argmax recovers Gaussian centers") {
  Rng rng(41);
  HeatVolume vol(4, 24, 20, 28);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<Vec3> centers;
    for (int j = 0; j < vol.joints; ++j) {
      // 4.5 sigma from the border so truncation does not bias the mean
      const Vec3 c(rng.uniform(6.75, vol.depth - 7.75), rng.uniform(6.75, vol.height - 7.75),
                   rng.uniform(6.75, vol.width - 7.75));
      write_gaussian_logits(vol, j, c, 1.5);
      centers.push_back(c);
    }
    const Points3 est = soft_argmax3d(vol);
    for (int j = 0; j < vol.joints; ++j) CHECK((est.row(j).transpose() - centers[static_cast<std::size_t>(j)]).norm() < 1e-3);
  }
}

TEST_CASE("soft-argmax symmetric cases") {
  HeatVolume vol(2, 8, 6, 10, 0.0);
  const Points3 u = soft_argmax3d(vol);
  CHECK(u(0, 0) == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(u(0, 1) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(u(0, 2) == doctest::Approx(4.5).epsilon(1e-12));
  // twin peaks at (2,1,2) and (4,3,6) -> midpoint
  vol.at(1, 2, 1, 2) = 40.0;
  vol.at(1, 4, 3, 6) = 40.0;
  const Points3 t = soft_argmax3d(vol);
  CHECK(std::abs(t(1, 0) - 3.0) < 1e-6);
  CHECK(std::abs(t(1, 1) - 2.0) < 1e-6);
  CHECK(std::abs(t(1, 2) - 4.0) < 1e-6);
}

TEST_CASE("soft-argmax survives large logits and sharpens with temperature") {
  HeatVolume vol(1, 4, 4, 4, 0.0);
  vol.at(0, 1, 2, 3) = 1e6;
  const Points3 p = soft_argmax3d(vol);
  CHECK(p.allFinite());
  CHECK((p.row(0) - Eigen::RowVector3d(1, 2, 3)).norm() < 1e-12);

  HeatVolume soft(1, 5, 5, 5, 0.0);
  soft.at(0, 0, 0, 0) = 2.0;
  const double d1 = soft_argmax3d(soft, 1.0).row(0).norm();
  const double d2 = soft_argmax3d(soft, 0.1).row(0).norm();
  CHECK(d2 < d1);
  CHECK_THROWS_AS(soft_argmax3d(soft, 0.0), InvariantError);
}

TEST_CASE("segmentation cross-entropy") {
  PartSegMap m(2, 2, 3, 0.0);
  std::vector<int> labels(6, 1);
  // uniform logits: -log(1/3)
  CHECK(segmentation_ce_loss(m, labels) == doctest::Approx(std::log(3.0)).epsilon(1e-14));
  // brute-force oracle on random logits
  Rng rng(42);
  for (auto& v : m.logits) v = rng.normal(3.0);
  for (auto& l : labels) l = rng.integer(0, 2);
  double expect = 0;
  for (int y = 0; y < 2; ++y) {
    for (int x = 0; x < 3; ++x) {
      double z = 0;
      for (int c = 0; c < 3; ++c) z += std::exp(m.at(c, y, x));
      expect += -std::log(std::exp(m.at(labels[static_cast<std::size_t>(y * 3 + x)], y, x)) / z);
    }
  }
  CHECK(segmentation_ce_loss(m, labels) == doctest::Approx(expect / 6).epsilon(1e-12));
  labels[0] = 3;
  CHECK_THROWS_AS(segmentation_ce_loss(m, labels), InvariantError);
  CHECK_THROWS_AS(segmentation_ce_loss(m, std::vector<int>(5, 0)), ShapeError);
}

TEST_CASE("masked l1") {
  const std::vector<double> p{1, 2, 3, 4}, g{1, 0, 0, 8}, m{0, 1, 1, 0};
  CHECK(l1_loss(p, g) == doctest::Approx((0 + 2 + 3 + 4) / 4.0));
  CHECK(l1_loss(p, g, std::span<const double>(m)) == doctest::Approx(2.5));
  const std::vector<double> zero(4, 0.0);
  CHECK(l1_loss(p, g, std::span<const double>(zero)) == 0.0);
}
