#include "robomesh/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "robomesh/augmentation.hpp"
#include "robomesh/rotation.hpp"

namespace robomesh {

namespace {

void append_rotation(std::vector<double>& out, const Vec3& axis_angle, RotationFormat format) {
  switch (format) {
    case RotationFormat::axis_angle: {
      const Vec3 v = canonicalize_axis_angle(axis_angle);
      out.insert(out.end(), {v.x(), v.y(), v.z()});
      return;
    }
    case RotationFormat::rot6d: {
      const Rot6d v = rotmat_to_rot6d(rodrigues(axis_angle));
      out.insert(out.end(), v.begin(), v.end());
      return;
    }
    case RotationFormat::rotmat: {
      const Mat3 R = rodrigues(axis_angle);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out.push_back(R(r, c));
      }
      return;
    }
  }
  throw InvariantError("make_representation: unknown rotation format");
}

double metric_mean(std::span<const double> a, std::span<const double> b, const ContrastiveConfig& cfg) {
  if (a.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    switch (cfg.metric) {
      case DistanceMetric::l1:
        s += std::abs(d);
        break;
      case DistanceMetric::mse:
        s += d * d;
        break;
      case DistanceMetric::smooth_l1: {
        const double ad = std::abs(d);
        s += ad < cfg.smooth_l1_beta ? 0.5 * d * d / cfg.smooth_l1_beta : ad - 0.5 * cfg.smooth_l1_beta;
        break;
      }
    }
  }
  return s / static_cast<double>(a.size());
}

}  // namespace

Representation make_representation(const BodyParams& params, const BodyModelTemplate& tmpl, RepresentationKind kind,
                                   RotationFormat format, const KeypointOptions& keypoint_options) {
  Representation rep;
  rep.kind = kind;
  rep.format = format;
  switch (kind) {
    case RepresentationKind::pose_concat:
    case RepresentationKind::go_plus_pose: {
      append_rotation(rep.vector, params.global_orient, format);
      rep.split = kind == RepresentationKind::go_plus_pose ? rep.vector.size() : 0;
      for (Eigen::Index j = 0; j < params.pose.rows(); ++j) {
        append_rotation(rep.vector, params.pose.row(j).transpose(), format);
      }
      return rep;
    }
    case RepresentationKind::keypoints: {
      rep.format = RotationFormat::axis_angle;
      const Points3 joints = regress_joints(forward(tmpl, params).vertices, tmpl.joint_regressor);
      const Points3 rel = joints.rowwise() - joints.row(0);
      double scale = 1.0;
      if (keypoint_options.scale_normalize && tmpl.joint_count() > 1) {
        double total = 0.0;
        for (int j = 1; j < tmpl.joint_count(); ++j) {
          total += (rel.row(j) - rel.row(tmpl.parents[static_cast<std::size_t>(j)])).norm();
        }
        const double mean_bone = total / (tmpl.joint_count() - 1);
        if (!(mean_bone > 0.0)) throw DegenerateError("make_representation: zero mean bone length");
        scale = 1.0 / mean_bone;
      }
      rep.vector.reserve(static_cast<std::size_t>(rel.size()));
      for (Eigen::Index j = 0; j < rel.rows(); ++j) {
        for (int c = 0; c < 3; ++c) rep.vector.push_back(rel(j, c) * scale);
      }
      return rep;
    }
  }
  throw InvariantError("make_representation: unknown representation kind");
}

double pair_distance(const Representation& a, const Representation& b, const ContrastiveConfig& cfg) {
  if (a.kind != b.kind) throw InvariantError("pair_distance: representation kinds differ");
  if (a.kind != RepresentationKind::keypoints && a.format != b.format) {
    throw InvariantError("pair_distance: rotation formats differ");
  }
  if (a.vector.size() != b.vector.size() || a.split != b.split) {
    throw ShapeError("pair_distance: representation lengths differ");
  }
  if (a.kind == RepresentationKind::go_plus_pose) {
    const std::span<const double> va(a.vector);
    const std::span<const double> vb(b.vector);
    return cfg.global_weight * metric_mean(va.first(a.split), vb.first(a.split), cfg) +
           cfg.pose_weight * metric_mean(va.subspan(a.split), vb.subspan(a.split), cfg);
  }
  return metric_mean(a.vector, b.vector, cfg);
}

Pairing Pairing::standard(std::size_t n) {
  Pairing p;
  for (std::size_t i = 0; i < n; ++i) p.pairs.emplace_back(i, i + n);
  return p;
}

Pairing Pairing::from_involution(std::span<const std::size_t> partner) {
  Pairing p;
  for (std::size_t i = 0; i < partner.size(); ++i) {
    const std::size_t j = partner[i];
    if (j >= partner.size() || j == i || partner[j] != i) {
      throw InvariantError("Pairing: partner map is not a fixed-point-free involution at index " + std::to_string(i));
    }
    if (i < j) p.pairs.emplace_back(i, j);
  }
  return p;
}

ContrastiveLoss contrastive_loss(std::span<const Representation> predicted, std::span<const Representation> ground_truth,
                                 const Pairing& pairing, const ContrastiveConfig& cfg) {
  const std::size_t n = pairing.pairs.size();
  const std::size_t batch = 2 * n;
  if (n == 0) throw InvariantError("contrastive_loss: empty pairing");
  if (predicted.size() != batch || ground_truth.size() != batch) {
    throw ShapeError("contrastive_loss: expected " + std::to_string(batch) + " predictions and ground truths");
  }
  std::vector<bool> seen(batch, false);
  for (const auto& [i, j] : pairing.pairs) {
    if (i >= batch || j >= batch || i == j || seen[i] || seen[j]) {
      throw InvariantError("contrastive_loss: pairing must cover every batch index exactly once");
    }
    seen[i] = seen[j] = true;
  }
  const double tau_neg = cfg.tau_neg.value_or(n > 1 ? 1.0 / static_cast<double>(batch - 2) : 0.0);
  if (cfg.tau_pos < 0.0 || tau_neg < 0.0 || !(cfg.tau_pos + tau_neg > 0.0 || n == 1)) {
    throw InvariantError("contrastive_loss: weights must be non-negative with a positive sum");
  }

  ContrastiveLoss out;
  out.per_anchor.reserve(n);
  for (const auto& [i, j] : pairing.pairs) {
    const double pos =
        std::abs(pair_distance(ground_truth[i], ground_truth[j], cfg) - pair_distance(predicted[i], predicted[j], cfg));
    double neg = 0.0;
    for (std::size_t k = 0; k < batch; ++k) {
      if (k == i || k == j) continue;
      neg += std::abs(pair_distance(ground_truth[i], ground_truth[k], cfg) -
                      pair_distance(predicted[i], predicted[k], cfg));
    }
    const double term = cfg.tau_pos * pos + tau_neg * neg;
    out.positive_terms.push_back(pos);
    out.negative_terms.push_back(neg);
    out.per_anchor.push_back(term);
    out.total += term;
  }
  return out;
}

SampleRecord build_positive(const SampleRecord& sample, std::uint64_t rng_seed) {
  static constexpr AugmentationKind kPool[] = {
      AugmentationKind::translate_x, AugmentationKind::translate_y, AugmentationKind::scale,
      AugmentationKind::hue,         AugmentationKind::brightness,  AugmentationKind::contrast,
      AugmentationKind::sharpness,   AugmentationKind::grayness,    AugmentationKind::low_resolution};
  std::mt19937_64 rng(rng_seed);
  std::vector<AugmentationKind> pool(std::begin(kPool), std::end(kPool));
  std::shuffle(pool.begin(), pool.end(), rng);
  const int count = std::uniform_int_distribution<int>(1, 3)(rng);
  SampleRecord out = sample;
  for (int i = 0; i < count; ++i) {
    const MagnitudeRange r = magnitude_range(pool[static_cast<std::size_t>(i)]);
    const double m = std::uniform_real_distribution<double>(r.lo, r.hi)(rng);
    out = apply_full(out, make_spec(pool[static_cast<std::size_t>(i)], m));
  }
  return out;
}

std::vector<RetrievalHit> retrieve_topk(const Representation& query, std::span<const Representation> gallery,
                                        std::size_t k, const ContrastiveConfig& cfg) {
  if (gallery.empty()) throw InvariantError("retrieve_topk: empty gallery");
  if (k > gallery.size()) throw InvariantError("retrieve_topk: k exceeds gallery size");
  std::vector<RetrievalHit> hits;
  hits.reserve(gallery.size());
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    hits.push_back({i, pair_distance(query, gallery[i], cfg)});
  }
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(k), hits.end(),
                    [](const RetrievalHit& a, const RetrievalHit& b) {
                      return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
                    });
  hits.resize(k);
  return hits;
}

}  // namespace robomesh
