#include "robomesh/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "robomesh/rotation.hpp"

namespace robomesh {

// ---------------------------------------------------------------------------
// Spec

Taxonomy classify(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::translate_x:
    case AugmentationKind::translate_y:
    case AugmentationKind::scale:
      return Taxonomy::location_variant;
    case AugmentationKind::rotation:
      return Taxonomy::pose_variant;
    case AugmentationKind::low_resolution:
    case AugmentationKind::hue:
    case AugmentationKind::sharpness:
    case AugmentationKind::grayness:
    case AugmentationKind::contrast:
    case AugmentationKind::brightness:
      return Taxonomy::image_variant;
  }
  throw InvariantError("classify: unknown augmentation kind");
}

std::string_view to_string(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::translate_x: return "translate_x";
    case AugmentationKind::translate_y: return "translate_y";
    case AugmentationKind::scale: return "scale";
    case AugmentationKind::low_resolution: return "low_resolution";
    case AugmentationKind::rotation: return "rotation";
    case AugmentationKind::hue: return "hue";
    case AugmentationKind::sharpness: return "sharpness";
    case AugmentationKind::grayness: return "grayness";
    case AugmentationKind::contrast: return "contrast";
    case AugmentationKind::brightness: return "brightness";
  }
  return "unknown";
}

std::string_view to_string(Taxonomy tag) {
  switch (tag) {
    case Taxonomy::image_variant: return "image-variant";
    case Taxonomy::location_variant: return "location-variant";
    case Taxonomy::pose_variant: return "pose-variant";
  }
  return "unknown";
}

AugmentationKind parse_augmentation_kind(std::string_view name) {
  std::string norm(name);
  std::replace(norm.begin(), norm.end(), '-', '_');
  for (AugmentationKind k : kAllAugmentationKinds) {
    if (to_string(k) == norm) return k;
  }
  throw InvariantError("unknown augmentation kind '" + std::string(name) + "'");
}

MagnitudeRange magnitude_range(AugmentationKind kind) {
  switch (kind) {
    case AugmentationKind::translate_x:
    case AugmentationKind::translate_y:
      return {-0.3, 0.3};
    case AugmentationKind::scale:
    case AugmentationKind::hue:
    case AugmentationKind::grayness:
    case AugmentationKind::contrast:
    case AugmentationKind::brightness:
      return {-0.5, 0.5};
    case AugmentationKind::low_resolution:
      return {1.0, 4.0};
    case AugmentationKind::rotation:
      return {-60.0, 60.0};
    case AugmentationKind::sharpness:
      return {-1.0, 1.0};
  }
  throw InvariantError("magnitude_range: unknown augmentation kind");
}

double identity_magnitude(AugmentationKind kind) {
  return kind == AugmentationKind::low_resolution ? 1.0 : 0.0;
}

AugmentationSpec make_spec(AugmentationKind kind, double magnitude) {
  const MagnitudeRange r = magnitude_range(kind);
  if (!std::isfinite(magnitude) || magnitude < r.lo || magnitude > r.hi) {
    throw InvariantError(std::string(to_string(kind)) + " magnitude " + std::to_string(magnitude) +
                         " outside [" + std::to_string(r.lo) + ", " + std::to_string(r.hi) + "]");
  }
  return {kind, magnitude};
}

nlohmann::json to_json(const AugmentationSpec& spec) {
  return {{"kind", std::string(to_string(spec.kind))}, {"magnitude", spec.magnitude}};
}

AugmentationSpec spec_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.contains("magnitude") || !j["kind"].is_string() ||
      !j["magnitude"].is_number()) {
    throw ParseError("augmentation spec must be an object {\"kind\": string, \"magnitude\": number}");
  }
  return make_spec(parse_augmentation_kind(j["kind"].get<std::string>()), j["magnitude"].get<double>());
}

// ---------------------------------------------------------------------------
// Photometric

namespace {

double luminance(const Image& img, int r, int c) {
  return 0.299 * img.at(r, c, 0) + 0.587 * img.at(r, c, 1) + 0.114 * img.at(r, c, 2);
}

Image blend(const Image& img, const Image& base, double f) {
  Image out(img.height, img.width);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    out.data[i] = std::clamp(base.data[i] + (1.0 + f) * (img.data[i] - base.data[i]), 0.0, 1.0);
  }
  return out;
}

Image box_blur(const Image& img) {
  Image out(img.height, img.width);
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      for (int ch = 0; ch < 3; ++ch) {
        double s = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            const int rr = std::clamp(r + dr, 0, img.height - 1);
            const int cc = std::clamp(c + dc, 0, img.width - 1);
            s += img.at(rr, cc, ch);
          }
        }
        out.at(r, c, ch) = s / 9.0;
      }
    }
  }
  return out;
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d == 0.0) {
    h = 0.0;
    return;
  }
  if (mx == r) {
    h = (g - b) / d;
  } else if (mx == g) {
    h = 2.0 + (b - r) / d;
  } else {
    h = 4.0 + (r - g) / d;
  }
  h /= 6.0;
  if (h < 0.0) h += 1.0;
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  const double h6 = h * 6.0;
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (static_cast<int>(sector) % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

Image shift_hue(const Image& img, double f) {
  Image out(img.height, img.width);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      double h, s, v;
      rgb_to_hsv(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2), h, s, v);
      h = std::fmod(h + f, 1.0);
      if (h < 0.0) h += 1.0;
      double r, g, b;
      hsv_to_rgb(h, s, v, r, g, b);
      out.at(y, x, 0) = std::clamp(r, 0.0, 1.0);
      out.at(y, x, 1) = std::clamp(g, 0.0, 1.0);
      out.at(y, x, 2) = std::clamp(b, 0.0, 1.0);
    }
  }
  return out;
}

Image resize_bilinear(const Image& img, int out_h, int out_w) {
  Image out(out_h, out_w);
  const double sy = static_cast<double>(img.height) / out_h;
  const double sx = static_cast<double>(img.width) / out_w;
  for (int r = 0; r < out_h; ++r) {
    const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, static_cast<double>(img.height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int c = 0; c < out_w; ++c) {
      const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, static_cast<double>(img.width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      for (int ch = 0; ch < 3; ++ch) {
        const double top = (1.0 - wx) * img.at(y0, x0, ch) + wx * img.at(y0, x1, ch);
        const double bot = (1.0 - wx) * img.at(y1, x0, ch) + wx * img.at(y1, x1, ch);
        out.at(r, c, ch) = std::clamp((1.0 - wy) * top + wy * bot, 0.0, 1.0);
      }
    }
  }
  return out;
}

}  // namespace

Image apply_image(const Image& img, const AugmentationSpec& spec) {
  if (spec.taxonomy() != Taxonomy::image_variant) {
    throw InvariantError("apply_image: " + std::string(to_string(spec.kind)) + " is not an image-variant augmentation");
  }
  if (!std::isfinite(spec.magnitude)) throw InvariantError("apply_image: non-finite magnitude");
  if (spec.is_identity()) return img;
  const double f = spec.magnitude;

  switch (spec.kind) {
    case AugmentationKind::brightness:
      return blend(img, Image(img.height, img.width, 0.0), f);
    case AugmentationKind::contrast: {
      double mean = 0.0;
      for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) mean += luminance(img, r, c);
      }
      mean /= static_cast<double>(img.height) * img.width;
      return blend(img, Image(img.height, img.width, mean), f);
    }
    case AugmentationKind::grayness: {
      Image gray(img.height, img.width);
      for (int r = 0; r < img.height; ++r) {
        for (int c = 0; c < img.width; ++c) {
          const double l = luminance(img, r, c);
          for (int ch = 0; ch < 3; ++ch) gray.at(r, c, ch) = l;
        }
      }
      return blend(img, gray, f);
    }
    case AugmentationKind::sharpness:
      return blend(img, box_blur(img), f);
    case AugmentationKind::hue:
      return shift_hue(img, f);
    case AugmentationKind::low_resolution: {
      if (f < 1.0) throw InvariantError("apply_image: low_resolution factor must be >= 1");
      const int h = std::max(1, static_cast<int>(std::lround(img.height / f)));
      const int w = std::max(1, static_cast<int>(std::lround(img.width / f)));
      return resize_bilinear(resize_bilinear(img, h, w), img.height, img.width);
    }
    default:
      break;
  }
  throw InvariantError("apply_image: unsupported kind");
}

// ---------------------------------------------------------------------------
// Geometric

AffineMap geometric_affine(const AugmentationSpec& spec, int crop_width, int crop_height) {
  if (crop_width <= 0 || crop_height <= 0) throw InvariantError("geometric_affine: empty crop");
  AffineMap aff;
  if (spec.is_identity()) return aff;
  const double f = spec.magnitude;
  switch (spec.kind) {
    case AugmentationKind::translate_x:
      aff.b = Vec2(2.0 * f, 0.0);
      break;
    case AugmentationKind::translate_y:
      aff.b = Vec2(0.0, 2.0 * f);
      break;
    case AugmentationKind::scale:
      if (!(std::abs(f) < 1.0)) throw InvariantError("geometric_affine: scale factor must satisfy |f| < 1");
      aff.A = Mat2::Identity() * (1.0 / (1.0 - f));
      break;
    case AugmentationKind::rotation:
      aff.A = rotation_2d(f * std::numbers::pi / 180.0);
      break;
    default:
      break;  // image-variant: identity
  }
  return aff;
}

namespace {

Vec2 pixel_center_normalized(int r, int c, int width, int height) {
  return {2.0 * (c + 0.5) / width - 1.0, 1.0 - 2.0 * (r + 0.5) / height};
}

Vec2 normalized_to_source_index(const Vec2& p, int width, int height) {
  return {0.5 * (p.x() + 1.0) * width - 0.5, 0.5 * (1.0 - p.y()) * height - 0.5};
}

}  // namespace

Image warp_image(const Image& img, const AffineMap& aff) {
  if (aff.is_identity()) return img;
  const AffineMap inv = aff.inverse();
  Image out(img.height, img.width, 0.0);
  auto sample = [&](int y, int x, int ch) {
    if (y < 0 || y >= img.height || x < 0 || x >= img.width) return 0.0;
    return img.at(y, x, ch);
  };
  for (int r = 0; r < img.height; ++r) {
    for (int c = 0; c < img.width; ++c) {
      const Vec2 src = normalized_to_source_index(inv.apply(pixel_center_normalized(r, c, img.width, img.height)),
                                                  img.width, img.height);
      const int x0 = static_cast<int>(std::floor(src.x()));
      const int y0 = static_cast<int>(std::floor(src.y()));
      const double wx = src.x() - x0;
      const double wy = src.y() - y0;
      for (int ch = 0; ch < 3; ++ch) {
        const double v = (1.0 - wy) * ((1.0 - wx) * sample(y0, x0, ch) + wx * sample(y0, x0 + 1, ch)) +
                         wy * ((1.0 - wx) * sample(y0 + 1, x0, ch) + wx * sample(y0 + 1, x0 + 1, ch));
        out.at(r, c, ch) = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return out;
}

std::vector<int> warp_labels(const std::vector<int>& labels, int width, int height, const AffineMap& aff, int fill) {
  if (labels.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("warp_labels: label buffer does not match dimensions");
  }
  if (aff.is_identity()) return labels;
  const AffineMap inv = aff.inverse();
  std::vector<int> out(labels.size(), fill);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Vec2 src = normalized_to_source_index(inv.apply(pixel_center_normalized(r, c, width, height)), width, height);
      const int x = static_cast<int>(std::lround(src.x()));
      const int y = static_cast<int>(std::lround(src.y()));
      if (x < 0 || x >= width || y < 0 || y >= height) continue;
      out[static_cast<std::size_t>(r) * width + c] = labels[static_cast<std::size_t>(y) * width + x];
    }
  }
  return out;
}

SampleRecord apply_full(const SampleRecord& sample, const AugmentationSpec& spec) {
  SampleRecord out = sample;
  out.provenance.push_back(spec);
  if (spec.taxonomy() == Taxonomy::image_variant) {
    out.image = apply_image(sample.image, spec);
    return out;
  }
  const int w = sample.image.width;
  const int h = sample.image.height;
  const AffineMap aff = geometric_affine(spec, w, h);
  if (aff.is_identity()) return out;

  out.image = warp_image(sample.image, aff);
  out.part_seg = warp_labels(sample.part_seg, w, h, aff, sample.part_count);

  const CameraOrient co = co_update(sample.params.camera, sample.params.global_orient, aff);
  out.params.camera = co.camera;
  out.params.global_orient = co.global_orient;

  out.keypoints2d = aff.apply(sample.keypoints2d);
  const Similarity sim = decompose_similarity(aff);
  if (sim.angle != 0.0) {
    const Mat3 Rz = rotation_about_z(sim.angle);
    for (Eigen::Index i = 0; i < out.keypoints3d.rows(); ++i) {
      out.keypoints3d.row(i) = (Rz * sample.keypoints3d.row(i).transpose()).transpose();
    }
  }
  for (std::size_t g = 0; g < out.part_points2d.size(); ++g) {
    out.part_points2d[g] = aff.apply(sample.part_points2d[g]);
    out.part_bboxes[g] = derive_part_bbox(normalized_to_pixels(out.part_points2d[g], w, h), sample.bbox_pad);
  }
  return out;
}

std::vector<AugmentationSpec> sweep_grid(AugmentationKind kind, int n_steps) {
  if (n_steps < 2) throw InvariantError("sweep_grid: n_steps must be >= 2");
  const MagnitudeRange r = magnitude_range(kind);
  const double id = identity_magnitude(kind);
  std::vector<double> mags;
  mags.reserve(static_cast<std::size_t>(n_steps) + 1);
  const double n1 = n_steps - 1;
  for (int i = 0; i < n_steps; ++i) {
    double m;
    if (r.lo == -r.hi) {
      // Symmetric ranges: exact zero at the midpoint for odd step counts.
      m = r.hi * (2.0 * i - n1) / n1;
    } else {
      m = r.lo + (r.hi - r.lo) * (i / n1);
    }
    mags.push_back(m);
  }
  mags.front() = r.lo;
  mags.back() = r.hi;
  if (std::find(mags.begin(), mags.end(), id) == mags.end()) {
    mags.insert(std::upper_bound(mags.begin(), mags.end(), id), id);
  }
  std::vector<AugmentationSpec> out;
  out.reserve(mags.size());
  for (double m : mags) out.push_back({kind, m});
  return out;
}

}  // namespace robomesh
