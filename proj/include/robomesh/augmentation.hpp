#pragma once

#include <vector>

#include "robomesh/augmentation_spec.hpp"
#include "robomesh/camera.hpp"
#include "robomesh/image.hpp"
#include "robomesh/sample.hpp"

namespace robomesh {

/// Photometric augmentations. Identity magnitudes return a bit-identical copy.
///
/// With f the magnitude and L = 0.299 R + 0.587 G + 0.114 B:
///   brightness  out = base + (1 + f)(img - base), base = black
///   contrast    same blend, base = constant mean of L over the image
///   grayness    same blend, base = per-pixel L
///   sharpness   same blend, base = 3x3 box blur (edge-clamped)
///   hue         RGB -> HSV, H <- (H + f) mod 1, HSV -> RGB
///   low_resolution  bilinear resize to round(size / f), then back (half-pixel centers)
/// Results are clamped to [0, 1]. Throws InvariantError for geometric kinds.
Image apply_image(const Image& img, const AugmentationSpec& spec);

/// Crop-frame map induced by a geometric augmentation:
///   translate_x f -> offset (2f, 0); translate_y f -> offset (0, 2f) (y is up)
///   scale f       -> uniform magnification 1 / (1 - f) about the crop center
///   rotation a    -> rotation by a degrees about the crop center
/// Image-variant kinds give the identity map.
AffineMap geometric_affine(const AugmentationSpec& spec, int crop_width, int crop_height);

/// Output pixel q samples the input at aff^-1(q), bilinear with zero padding.
Image warp_image(const Image& img, const AffineMap& aff);
/// Nearest-neighbour warp of a label map; uncovered pixels get `fill`.
std::vector<int> warp_labels(const std::vector<int>& labels, int width, int height, const AffineMap& aff, int fill);

/// Applies `spec` to the sample's image and keeps every ground-truth field consistent.
SampleRecord apply_full(const SampleRecord& sample, const AugmentationSpec& spec);

/// Evenly spaced magnitudes across the kind's range. The identity magnitude is
/// inserted when the spacing misses it, so an even n_steps yields n_steps + 1 specs.
std::vector<AugmentationSpec> sweep_grid(AugmentationKind kind, int n_steps);

}  // namespace robomesh
