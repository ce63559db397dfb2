#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "robomesh/body_model.hpp"
#include "robomesh/sample.hpp"

namespace robomesh {

enum class RepresentationKind { pose_concat, go_plus_pose, keypoints };
enum class RotationFormat { axis_angle, rot6d, rotmat };
enum class DistanceMetric { l1, smooth_l1, mse };

struct Representation {
  RepresentationKind kind = RepresentationKind::pose_concat;
  RotationFormat format = RotationFormat::axis_angle;  // ignored for keypoints
  std::vector<double> vector;
  /// go_plus_pose only: vector[0, split) is the global orientation part.
  std::size_t split = 0;

  bool operator==(const Representation&) const = default;
};

struct ContrastiveConfig {
  double tau_pos = 1.0;
  /// Defaults to 1 / (2N - 2) for a batch of N pairs (0 when N == 1).
  std::optional<double> tau_neg;
  DistanceMetric metric = DistanceMetric::l1;
  double smooth_l1_beta = 1.0;
  /// go_plus_pose part weights.
  double global_weight = 1.0;
  double pose_weight = 1.0;
};

struct KeypointOptions {
  /// Divide root-aligned joints by the mean bone length of the kinematic tree.
  bool scale_normalize = true;
};

Representation make_representation(const BodyParams& params, const BodyModelTemplate& tmpl, RepresentationKind kind,
                                   RotationFormat format = RotationFormat::axis_angle,
                                   const KeypointOptions& keypoint_options = {});

/// Mean elementwise metric; for go_plus_pose the weighted sum of the two parts.
double pair_distance(const Representation& a, const Representation& b, const ContrastiveConfig& cfg = {});

/// Anchor/positive index pairs over a batch of 2N items. Every index appears exactly once.
struct Pairing {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;

  /// (i, i + N) for i < N.
  static Pairing standard(std::size_t n);
  /// From a fixed-point-free involution; the smaller index of each pair is the anchor.
  static Pairing from_involution(std::span<const std::size_t> partner);
};

struct ContrastiveLoss {
  double total = 0.0;
  std::vector<double> per_anchor;  // positive + weighted negative term of each pair
  std::vector<double> positive_terms;
  std::vector<double> negative_terms;  // unweighted sums over k
};

/// Sum over anchors i with positive j of
///   tau_pos |d(p_i, p_j) - d(z_i, z_j)| + tau_neg sum_{k != i, j} |d(p_i, p_k) - d(z_i, z_k)|
/// with z the predicted and p the ground-truth representations.
ContrastiveLoss contrastive_loss(std::span<const Representation> predicted, std::span<const Representation> ground_truth,
                                 const Pairing& pairing, const ContrastiveConfig& cfg = {});

/// Positive view of a sample: 1 to 3 distinct augmentations drawn from the
/// location-variant and photometric kinds (never rotation), magnitudes
/// uniform over each kind's range.
SampleRecord build_positive(const SampleRecord& sample, std::uint64_t rng_seed);

struct RetrievalHit {
  std::size_t index;
  double distance;
};

/// k nearest gallery items, ascending by distance, ties by lower index.
std::vector<RetrievalHit> retrieve_topk(const Representation& query, std::span<const Representation> gallery,
                                        std::size_t k, const ContrastiveConfig& cfg = {});

}  // namespace robomesh
