#include "robomesh/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace robomesh {

Points3 soft_argmax3d(const HeatVolume& volume, double temperature) {
  if (!(temperature > 0.0)) {
    throw InvariantError("soft_argmax3d: temperature must be positive");
  }
  const std::size_t n = volume.voxels();
  if (volume.values.size() != n * static_cast<std::size_t>(volume.joints)) {
    throw ShapeError("soft_argmax3d: value buffer does not match J x D x H x W");
  }
  Points3 out(volume.joints, 3);
  std::vector<double> weights(n);
  for (int j = 0; j < volume.joints; ++j) {
    const double* v = volume.values.data() + static_cast<std::size_t>(j) * n;
    const double peak = *std::max_element(v, v + n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      weights[i] = std::exp((v[i] - peak) / temperature);
      total += weights[i];
    }
    double ez = 0.0, ey = 0.0, ex = 0.0;
    std::size_t i = 0;
    for (int z = 0; z < volume.depth; ++z) {
      double sz = 0.0;
      for (int y = 0; y < volume.height; ++y) {
        double sy = 0.0;
        for (int x = 0; x < volume.width; ++x, ++i) {
          sy += weights[i];
          ex += weights[i] * x;
        }
        sz += sy;
        ey += sy * y;
      }
      ez += sz * z;
    }
    out(j, 0) = ez / total;
    out(j, 1) = ey / total;
    out(j, 2) = ex / total;
  }
  return out;
}

void write_gaussian_logits(HeatVolume& volume, int joint, const Vec3& center, double sigma) {
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int z = 0; z < volume.depth; ++z) {
    for (int y = 0; y < volume.height; ++y) {
      for (int x = 0; x < volume.width; ++x) {
        const double d2 = (z - center.x()) * (z - center.x()) + (y - center.y()) * (y - center.y()) +
                          (x - center.z()) * (x - center.z());
        volume.at(joint, z, y, x) = -d2 * inv;
      }
    }
  }
}

double segmentation_ce_loss(const PartSegMap& pred, std::span<const int> labels) {
  const std::size_t pixels = static_cast<std::size_t>(pred.height) * pred.width;
  if (labels.size() != pixels) {
    throw ShapeError("segmentation_ce_loss: label map has " + std::to_string(labels.size()) +
                     " pixels, logits have " + std::to_string(pixels));
  }
  const int C = pred.channels();
  double total = 0.0;
  for (int y = 0; y < pred.height; ++y) {
    for (int x = 0; x < pred.width; ++x) {
      const int label = labels[static_cast<std::size_t>(y) * pred.width + x];
      if (label < 0 || label >= C) {
        throw InvariantError("segmentation_ce_loss: label " + std::to_string(label) + " outside [0, " +
                             std::to_string(pred.parts) + "]");
      }
      double peak = -std::numeric_limits<double>::infinity();
      for (int c = 0; c < C; ++c) peak = std::max(peak, pred.at(c, y, x));
      double sum = 0.0;
      for (int c = 0; c < C; ++c) sum += std::exp(pred.at(c, y, x) - peak);
      total += peak + std::log(sum) - pred.at(label, y, x);
    }
  }
  return total / static_cast<double>(pixels);
}

double l1_loss(std::span<const double> pred, std::span<const double> gt,
               std::optional<std::span<const double>> mask) {
  if (pred.size() != gt.size()) {
    throw ShapeError("l1_loss: pred has " + std::to_string(pred.size()) + " elements, gt has " +
                     std::to_string(gt.size()));
  }
  if (mask && mask->size() != pred.size()) {
    throw ShapeError("l1_loss: mask size does not match");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double m = mask ? (*mask)[i] : 1.0;
    num += m * std::abs(pred[i] - gt[i]);
    den += m;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace robomesh
