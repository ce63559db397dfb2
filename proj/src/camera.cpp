#include "robomesh/camera.hpp"

#include <Eigen/LU>

#include <cmath>
#include <string>

#include "robomesh/rotation.hpp"

namespace robomesh {

Points2 AffineMap::apply(const Points2& points) const {
  Points2 out(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = (A * points.row(i).transpose() + b).transpose();
  }
  return out;
}

AffineMap AffineMap::after(const AffineMap& other) const {
  return {A * other.A, A * other.b + b};
}

AffineMap AffineMap::inverse() const {
  const double det = A.determinant();
  if (det == 0.0 || !std::isfinite(det)) {
    throw DegenerateError("AffineMap::inverse: singular linear part");
  }
  const Mat2 Ai = A.inverse();
  return {Ai, -Ai * b};
}

Similarity decompose_similarity(const AffineMap& aff, double tol) {
  const double a = 0.5 * (aff.A(0, 0) + aff.A(1, 1));
  const double c = 0.5 * (aff.A(1, 0) - aff.A(0, 1));
  const double k = std::hypot(a, c);
  if (!(k > 0.0) || std::abs(aff.A(0, 0) - aff.A(1, 1)) > tol * k ||
      std::abs(aff.A(0, 1) + aff.A(1, 0)) > tol * k) {
    throw InvariantError("affine map is not a similarity (shear, anisotropic scale or reflection)");
  }
  return {k, std::atan2(c, a), aff.b};
}

Points2 project(const Points3& points, const Camera& cam, const ProjectionConfig& config) {
  Points2 out(points.rows(), 2);
  if (config.kind == ProjectionKind::weak_perspective) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      out(i, 0) = cam.s * points(i, 0) + cam.t.x();
      out(i, 1) = cam.s * points(i, 1) + cam.t.y();
    }
    return out;
  }
  // Depth placed so that the z = 0 plane reproduces the weak-perspective image.
  const double tz = config.focal / cam.s;
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const double z = points(i, 2) + tz;
    out(i, 0) = config.focal * (points(i, 0) + cam.t.x() / cam.s) / z;
    out(i, 1) = config.focal * (points(i, 1) + cam.t.y() / cam.s) / z;
  }
  return out;
}

Points2 normalized_to_pixels(const Points2& points, int width, int height) {
  Points2 out(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out(i, 0) = 0.5 * (points(i, 0) + 1.0) * width;
    out(i, 1) = 0.5 * (1.0 - points(i, 1)) * height;
  }
  return out;
}

Points2 pixels_to_normalized(const Points2& points, int width, int height) {
  Points2 out(points.rows(), 2);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out(i, 0) = 2.0 * points(i, 0) / width - 1.0;
    out(i, 1) = 1.0 - 2.0 * points(i, 1) / height;
  }
  return out;
}

Bbox derive_part_bbox(const Points2& keypoints, double pad, bool square) {
  if (keypoints.rows() < 2) {
    throw DegenerateError("derive_part_bbox: need at least 2 keypoints, got " +
                          std::to_string(keypoints.rows()));
  }
  if (pad < 0.0) {
    throw InvariantError("derive_part_bbox: pad must be non-negative");
  }
  const Eigen::RowVector2d lo = keypoints.colwise().minCoeff();
  const Eigen::RowVector2d hi = keypoints.colwise().maxCoeff();
  const Eigen::RowVector2d range = hi - lo;
  if (!(range.x() > 0.0) || !(range.y() > 0.0)) {
    throw DegenerateError("derive_part_bbox: keypoints have zero extent along an axis");
  }
  Bbox box;
  // Mean-centered, range-sized; the two need not agree.
  box.center = keypoints.colwise().mean().transpose();
  box.w = range.x() * (1.0 + pad);
  box.h = range.y() * (1.0 + pad);
  if (square) {
    box.w = box.h = std::max(box.w, box.h);
  }
  return box;
}

AffineMap crop_affine(const Bbox& bbox, int image_width, int image_height) {
  if (!(bbox.w > 0.0) || !(bbox.h > 0.0)) {
    throw InvariantError("crop_affine: bbox must have positive width and height");
  }
  if (image_width <= 0 || image_height <= 0) {
    throw InvariantError("crop_affine: image dimensions must be positive");
  }
  AffineMap aff;
  aff.A << 2.0 / bbox.w, 0.0, 0.0, -2.0 / bbox.h;
  aff.b << -2.0 * bbox.center.x() / bbox.w, 2.0 * bbox.center.y() / bbox.h;
  return aff;
}

CameraOrient co_update(const Camera& cam, const Vec3& global_orient, const AffineMap& aff) {
  if (aff.is_identity()) {
    return {cam, global_orient};
  }
  const Similarity sim = decompose_similarity(aff);
  CameraOrient out;
  out.camera.s = cam.s * sim.scale;
  if (sim.angle == 0.0) {
    out.camera.t = sim.scale * cam.t + sim.offset;
    out.global_orient = global_orient;
  } else {
    out.camera.t = sim.scale * (rotation_2d(sim.angle) * cam.t) + sim.offset;
    out.global_orient = rotation_log(rotation_about_z(sim.angle) * rodrigues(global_orient));
  }
  return out;
}

}  // namespace robomesh
