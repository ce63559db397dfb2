#pragma once

#include <array>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace robomesh {

enum class AugmentationKind {
  translate_x,
  translate_y,
  scale,
  low_resolution,
  rotation,
  hue,
  sharpness,
  grayness,
  contrast,
  brightness,
};

inline constexpr std::array<AugmentationKind, 10> kAllAugmentationKinds = {
    AugmentationKind::translate_x, AugmentationKind::translate_y, AugmentationKind::scale,
    AugmentationKind::low_resolution, AugmentationKind::rotation,  AugmentationKind::hue,
    AugmentationKind::sharpness,   AugmentationKind::grayness,     AugmentationKind::contrast,
    AugmentationKind::brightness};

enum class Taxonomy { image_variant, location_variant, pose_variant };

Taxonomy classify(AugmentationKind kind);

std::string_view to_string(AugmentationKind kind);
std::string_view to_string(Taxonomy tag);
/// Throws InvariantError for unknown names. Accepts '-' in place of '_'.
AugmentationKind parse_augmentation_kind(std::string_view name);

struct MagnitudeRange {
  double lo;
  double hi;
};

/// Benchmark range per kind. Translations are fractions of the crop size,
/// scale a fraction of the box size, low_resolution a downsampling factor,
/// rotation degrees, the rest enhancement factors.
MagnitudeRange magnitude_range(AugmentationKind kind);
/// 1 for low_resolution, 0 for everything else.
double identity_magnitude(AugmentationKind kind);

struct AugmentationSpec {
  AugmentationKind kind = AugmentationKind::hue;
  double magnitude = 0.0;

  Taxonomy taxonomy() const { return classify(kind); }
  bool is_identity() const { return magnitude == identity_magnitude(kind); }
  bool operator==(const AugmentationSpec&) const = default;
};

/// Validated construction: throws InvariantError when the magnitude falls
/// outside magnitude_range(kind).
AugmentationSpec make_spec(AugmentationKind kind, double magnitude);

nlohmann::json to_json(const AugmentationSpec& spec);
AugmentationSpec spec_from_json(const nlohmann::json& j);

}  // namespace robomesh
