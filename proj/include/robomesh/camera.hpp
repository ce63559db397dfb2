#pragma once

#include "robomesh/types.hpp"

namespace robomesh {

// Coordinate frames
// -----------------
// Normalized crop frame: x to the right, y up, the crop spans [-1, 1]^2.
// Pixel frame: origin at the top-left image corner, x to the right, y down,
// pixel (c, r) covers [c, c+1] x [r, r+1] with its center at (c+0.5, r+0.5).
// Camera frame: x right, y up, z along the optical axis away from the camera.

/// Weak-perspective camera acting on root-relative points.
struct Camera {
  double s = 1.0;
  Vec2 t = Vec2::Zero();

  bool operator==(const Camera&) const = default;
};

enum class ProjectionKind { weak_perspective, perspective };

struct ProjectionConfig {
  ProjectionKind kind = ProjectionKind::weak_perspective;
  /// Focal length in normalized crop units, perspective model only.
  double focal = 5000.0 / 112.0;
};

/// Axis-aligned box in pixels.
struct Bbox {
  Vec2 center = Vec2::Zero();
  double w = 0.0;
  double h = 0.0;

  double min_x() const { return center.x() - 0.5 * w; }
  double max_x() const { return center.x() + 0.5 * w; }
  double min_y() const { return center.y() - 0.5 * h; }
  double max_y() const { return center.y() + 0.5 * h; }
};

/// p' = A p + b on normalized crop coordinates.
struct AffineMap {
  Mat2 A = Mat2::Identity();
  Vec2 b = Vec2::Zero();

  static AffineMap identity() { return {}; }

  Vec2 apply(const Vec2& p) const { return A * p + b; }
  Points2 apply(const Points2& points) const;

  /// (*this)(other(p)).
  AffineMap after(const AffineMap& other) const;
  AffineMap inverse() const;

  bool is_identity() const { return A == Mat2::Identity() && b == Vec2::Zero(); }
  bool operator==(const AffineMap&) const = default;
};

/// Uniform scale, rotation and translation: A = scale * R(angle).
struct Similarity {
  double scale = 1.0;
  double angle = 0.0;
  Vec2 offset = Vec2::Zero();
};

/// Throws InvariantError if `aff` is not a proper similarity (shear, anisotropic scale, reflection).
Similarity decompose_similarity(const AffineMap& aff, double tol = 1e-9);

Points2 project(const Points3& points, const Camera& cam, const ProjectionConfig& config = {});

Points2 normalized_to_pixels(const Points2& points, int width, int height);
Points2 pixels_to_normalized(const Points2& points, int width, int height);

/// Box centered on the keypoint mean with extent from the keypoint range,
/// each side scaled by (1 + pad). With `square`, both sides take the larger extent.
Bbox derive_part_bbox(const Points2& keypoints, double pad = 0.2, bool square = false);

/// Maps full-image pixel coordinates into the box's normalized crop frame.
AffineMap crop_affine(const Bbox& bbox, int image_width, int image_height);

struct CameraOrient {
  Camera camera;
  Vec3 global_orient = Vec3::Zero();
};

/// Ground-truth bookkeeping for a similarity applied to the crop:
/// the projection of the re-oriented body under the new camera equals the
/// affine image of the original projection.
CameraOrient co_update(const Camera& cam, const Vec3& global_orient, const AffineMap& aff);

}  // namespace robomesh
