#include "robomesh/metrics.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace robomesh {

Points3 AlignmentResult::apply(const Points3& points) const {
  Points3 out(points.rows(), 3);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    out.row(i) = (scale * (rotation * points.row(i).transpose()) + translation).transpose();
  }
  return out;
}

namespace {

void require_same(const Points3& a, const Points3& b, const char* what) {
  if (a.rows() != b.rows()) {
    throw ShapeError(std::string(what) + ": " + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) +
                     " points");
  }
}

double mean_distance_mm(const Points3& a, const Points3& b) {
  if (a.rows() == 0) return 0.0;
  return 1000.0 * (a - b).rowwise().norm().mean();
}

}  // namespace

AlignmentResult procrustes_align(const Points3& source, const Points3& target) {
  require_same(source, target, "procrustes_align");
  const Eigen::Index n = source.rows();
  if (n < 3) throw DegenerateError("procrustes_align: need at least 3 points");

  const Eigen::RowVector3d mu_x = source.colwise().mean();
  const Eigen::RowVector3d mu_y = target.colwise().mean();
  const Points3 xc = source.rowwise() - mu_x;
  const Points3 yc = target.rowwise() - mu_y;

  const Eigen::JacobiSVD<MatX> shape_svd(xc);
  const auto sv = shape_svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
    throw DegenerateError("procrustes_align: source points are collinear or coincident");
  }

  const Mat3 cov = (yc.transpose() * xc) / static_cast<double>(n);
  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Mat3& U = svd.matrixU();
  const Mat3& V = svd.matrixV();
  Vec3 d(1.0, 1.0, 1.0);
  if (U.determinant() * V.determinant() < 0.0) d(2) = -1.0;

  AlignmentResult out;
  out.rotation = U * d.asDiagonal() * V.transpose();
  const double var_x = xc.squaredNorm() / static_cast<double>(n);
  out.scale = svd.singularValues().dot(d) / var_x;
  out.translation = mu_y.transpose() - out.scale * out.rotation * mu_x.transpose();
  out.residual_mm = mean_distance_mm(out.apply(source), target);
  return out;
}

double mpjpe(const Points3& pred, const Points3& gt, int root_index) {
  require_same(pred, gt, "mpjpe");
  if (root_index < 0 || root_index >= pred.rows()) {
    throw InvariantError("mpjpe: root index " + std::to_string(root_index) + " out of range");
  }
  const Points3 p = pred.rowwise() - pred.row(root_index);
  const Points3 g = gt.rowwise() - gt.row(root_index);
  return mean_distance_mm(p, g);
}

double pve(const Points3& pred_vertices, const Points3& gt_vertices, const Vec3& pred_root, const Vec3& gt_root) {
  require_same(pred_vertices, gt_vertices, "pve");
  const Points3 p = pred_vertices.rowwise() - pred_root.transpose();
  const Points3 g = gt_vertices.rowwise() - gt_root.transpose();
  return mean_distance_mm(p, g);
}

double pa_mpjpe(const Points3& pred, const Points3& gt) {
  return procrustes_align(pred, gt).residual_mm;
}

double pa_pve(const Points3& pred_vertices, const Points3& gt_vertices) {
  return procrustes_align(pred_vertices, gt_vertices).residual_mm;
}

double two_hand_mpjpe(const Points3& pred_left, const Points3& gt_left, const Points3& pred_right,
                      const Points3& gt_right, int wrist_index) {
  return 0.5 * (mpjpe(pred_left, gt_left, wrist_index) + mpjpe(pred_right, gt_right, wrist_index));
}

namespace {

// Uniform grid with cell size equal to the query radius; a neighbour strictly
// within the radius lies in one of the 27 surrounding cells.
class RadiusGrid {
 public:
  RadiusGrid(const Points3& points, double radius) : points_(points), radius_(radius) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      cells_[key(cell_of(points.row(i)))].push_back(i);
    }
  }

  bool any_within(const Eigen::RowVector3d& q) const {
    const Eigen::Vector3i c = cell_of(q);
    const double r2 = radius_ * radius_;
    for (int dx = -1; dx <= 1; ++dx) {
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(key(c + Eigen::Vector3i(dx, dy, dz)));
          if (it == cells_.end()) continue;
          for (Eigen::Index i : it->second) {
            if ((points_.row(i) - q).squaredNorm() < r2) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  Eigen::Vector3i cell_of(const Eigen::RowVector3d& p) const {
    return {static_cast<int>(std::floor(p.x() / radius_)), static_cast<int>(std::floor(p.y() / radius_)),
            static_cast<int>(std::floor(p.z() / radius_))};
  }
  static std::int64_t key(const Eigen::Vector3i& c) {
    return (static_cast<std::int64_t>(c.x()) * 73856093) ^ (static_cast<std::int64_t>(c.y()) * 19349663) ^
           (static_cast<std::int64_t>(c.z()) * 83492791);
  }

  const Points3& points_;
  double radius_;
  std::unordered_map<std::int64_t, std::vector<Eigen::Index>> cells_;
};

double fraction_matched(const Points3& queries, const Points3& reference, double radius) {
  const RadiusGrid grid(reference, radius);
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < queries.rows(); ++i) {
    if (grid.any_within(queries.row(i))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(queries.rows());
}

}  // namespace

std::vector<double> f_score(const Points3& pred, const Points3& gt, std::span<const double> thresholds_mm) {
  if (pred.rows() == 0 || gt.rows() == 0) throw InvariantError("f_score: empty point set");
  Points3 aligned = pred;
  if (pred.rows() == gt.rows()) {
    try {
      aligned = procrustes_align(pred, gt).apply(pred);
    } catch (const DegenerateError&) {
    }
  }
  std::vector<double> out;
  out.reserve(thresholds_mm.size());
  for (double tau_mm : thresholds_mm) {
    const double radius = tau_mm / 1000.0;
    if (!(radius > 0.0)) {
      out.push_back(0.0);
      continue;
    }
    const double precision = fraction_matched(aligned, gt, radius);
    const double recall = fraction_matched(gt, aligned, radius);
    out.push_back(precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0);
  }
  return out;
}

double bbox_iou(const Bbox& a, const Bbox& b) {
  const double ix = std::max(0.0, std::min(a.max_x(), b.max_x()) - std::max(a.min_x(), b.min_x()));
  const double iy = std::max(0.0, std::min(a.max_y(), b.max_y()) - std::max(a.min_y(), b.min_y()));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace robomesh
