#pragma once

#include <span>
#include <vector>

#include "robomesh/camera.hpp"
#include "robomesh/types.hpp"

namespace robomesh {

struct AlignmentResult {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double residual_mm = 0.0;  // mean distance after alignment, inputs in meters

  Points3 apply(const Points3& points) const;
};

/// Similarity (s, R, t) minimizing sum |s R x_i + t - y_i|^2 (Umeyama, with
/// determinant correction against reflections). Throws DegenerateError for
/// N < 3 or a centered source of rank < 2.
AlignmentResult procrustes_align(const Points3& source, const Points3& target);

/// Root-aligned mean joint distance in millimeters (inputs in meters).
double mpjpe(const Points3& pred, const Points3& gt, int root_index = 0);
/// Root-aligned mean vertex distance in millimeters; roots are the respective root joints.
double pve(const Points3& pred_vertices, const Points3& gt_vertices, const Vec3& pred_root, const Vec3& gt_root);
/// Mean distance in millimeters after Procrustes alignment of pred onto gt.
double pa_mpjpe(const Points3& pred, const Points3& gt);
double pa_pve(const Points3& pred_vertices, const Points3& gt_vertices);

/// Two-hand error: each hand aligned to its own wrist, then averaged.
double two_hand_mpjpe(const Points3& pred_left, const Points3& gt_left, const Points3& pred_right,
                      const Points3& gt_right, int wrist_index = 0);

/// F-score per threshold (millimeters) after Procrustes alignment of pred onto
/// gt. A point counts as matched when its nearest neighbour is strictly closer
/// than the threshold. Alignment is skipped when it is degenerate.
std::vector<double> f_score(const Points3& pred, const Points3& gt, std::span<const double> thresholds_mm);

double bbox_iou(const Bbox& a, const Bbox& b);

}  // namespace robomesh
