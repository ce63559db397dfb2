#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "robomesh/camera.hpp"
#include "robomesh/types.hpp"

namespace robomesh {

// Rasterization conventions (bit-exact, relied upon by tests):
//  * vertex (x, y) in the normalized crop frame maps to pixel coordinates
//      px = 0.5 * (x + 1) * width,  py = 0.5 * (1 - y) * height
//  * a pixel is sampled at its center (c + 0.5, r + 0.5)
//  * triangles are reordered (swap of the 2nd and 3rd vertex) so that
//      area = cross(b - a, c - a) > 0; zero-area triangles are skipped
//  * edge u->v value at p: (v.x - u.x) * (p.y - u.y) - (v.y - u.y) * (p.x - u.x)
//    evaluated for the edges (b,c), (c,a), (a,b); the pixel is covered when every
//    value is > 0, or == 0 on a top-left edge (dy < 0, or dy == 0 and dx > 0)
//  * depth = (e_bc * z_a + e_ca * z_b + e_ab * z_c) / area; smaller is nearer;
//    a face replaces the stored pixel only if strictly nearer, so equal depths
//    keep the lower face index

struct RenderTarget {
  int width = 0;
  int height = 0;
  int background = 0;            // label used where nothing is covered (P)
  std::vector<int> labels;       // row-major H x W
  std::vector<double> depth;     // +inf where uncovered
  std::vector<double> probability;  // hard coverage, 0 or 1

  int label(int row, int col) const { return labels[static_cast<std::size_t>(row) * width + col]; }
};

RenderTarget rasterize_parts(const Points2& verts2d, std::span<const double> depths, const Faces& faces,
                             std::span<const int> part_of_face, int part_count, int width, int height);

/// d p(pixel) / d (x, y) of one vertex, in normalized crop units.
struct VertexGradient {
  int vertex;
  Vec2 d;
};

struct SoftSilhouette {
  int width = 0;
  int height = 0;
  std::vector<double> probability;      // sigmoid(-d / sigma)
  std::vector<double> signed_distance;  // pixels, negative inside
  /// Distance gap (pixels) between the nearest contour edge and the next edge
  /// whose closest point differs; the silhouette is smooth while vertex motion
  /// stays below half this value.
  std::vector<double> margin;
  /// Gradient entries of pixel i are entries[offsets[i] .. offsets[i+1]).
  std::vector<std::size_t> offsets;
  std::vector<VertexGradient> entries;

  std::span<const VertexGradient> gradient(std::size_t pixel) const {
    return {entries.data() + offsets[pixel], offsets[pixel + 1] - offsets[pixel]};
  }
};

/// Signed-distance sigmoid silhouette of the union of `faces`. The distance is
/// taken to the mesh contour: edges with a single non-degenerate face, edges
/// whose two faces have opposite 2D winding, and non-manifold edges. Only the
/// two vertices of each pixel's nearest contour edge receive gradient.
SoftSilhouette soft_silhouette(const Points2& verts2d, const Faces& faces, double sigma, int width,
                               int height);

struct LossWithGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Mean binary cross-entropy with probabilities clamped to [1e-7, 1 - 1e-7].
/// The gradient is zero wherever the clamp is active.
LossWithGradient projected_silhouette_loss(std::span<const double> probability, std::span<const double> mask);

/// Loss of the silhouette of root-relative `points` seen through `cam`, with its
/// analytic gradient with respect to the camera.
struct CameraLossGradient {
  double loss = 0.0;
  double d_scale = 0.0;
  Vec2 d_translation = Vec2::Zero();
};
CameraLossGradient silhouette_loss_camera_gradient(const Points3& points, const Faces& faces, const Camera& cam,
                                                   std::span<const double> mask, double sigma, int width,
                                                   int height);

/// Mean Euclidean distance between corresponding 2D points, in the inputs' units.
double projected_vertex_error(const Points2& pred, const Points2& gt);

/// Plain-text PGM (P2) of a label buffer.
void write_labels_pgm(const RenderTarget& target, const std::filesystem::path& path);
/// Row-per-line CSV grid.
void write_grid_csv(std::span<const double> values, int width, int height, const std::filesystem::path& path);

}  // namespace robomesh
