#pragma once

#include <optional>
#include <span>
#include <vector>

#include "robomesh/types.hpp"

namespace robomesh {

/// Per-joint 3D logit volume, stored J x D x H x W row-major.
struct HeatVolume {
  int joints = 0;
  int depth = 32;
  int height = 32;
  int width = 32;
  std::vector<double> values;

  HeatVolume() = default;
  HeatVolume(int j, int d, int h, int w, double fill = 0.0)
      : joints(j), depth(d), height(h), width(w),
        values(static_cast<std::size_t>(j) * d * h * w, fill) {}

  std::size_t voxels() const { return static_cast<std::size_t>(depth) * height * width; }
  double& at(int j, int z, int y, int x) { return values[index(j, z, y, x)]; }
  double at(int j, int z, int y, int x) const { return values[index(j, z, y, x)]; }
  std::size_t index(int j, int z, int y, int x) const {
    return ((static_cast<std::size_t>(j) * depth + z) * height + y) * static_cast<std::size_t>(width) + x;
  }
};

/// (P+1) x H x W part logits; channel P is background.
struct PartSegMap {
  int parts = 0;
  int height = 64;
  int width = 64;
  std::vector<double> logits;

  PartSegMap() = default;
  PartSegMap(int p, int h, int w, double fill = 0.0)
      : parts(p), height(h), width(w), logits(static_cast<std::size_t>(p + 1) * h * w, fill) {}

  int channels() const { return parts + 1; }
  double& at(int c, int y, int x) { return logits[(static_cast<std::size_t>(c) * height + y) * width + x]; }
  double at(int c, int y, int x) const { return logits[(static_cast<std::size_t>(c) * height + y) * width + x]; }
};

/// Softmax over every voxel of a joint's volume (logits / temperature), then
/// the expected (z, y, x) voxel coordinate. Rows are joints.
Points3 soft_argmax3d(const HeatVolume& volume, double temperature = 1.0);

/// Log of an isotropic Gaussian centered at `center` (z, y, x), in voxels.
/// Feeding these logits to soft_argmax3d at temperature 1 yields a discrete Gaussian.
void write_gaussian_logits(HeatVolume& volume, int joint, const Vec3& center, double sigma = 1.5);

/// Mean over pixels of -log softmax(logits)[label]. Labels are row-major H x W in [0, P].
double segmentation_ce_loss(const PartSegMap& pred, std::span<const int> labels);

/// Masked mean absolute difference sum(m |p - g|) / sum(m); plain mean without a mask.
/// Returns 0 when the mask sums to zero.
double l1_loss(std::span<const double> pred, std::span<const double> gt,
               std::optional<std::span<const double>> mask = std::nullopt);

}  // namespace robomesh
