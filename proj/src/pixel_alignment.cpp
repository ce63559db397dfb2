#include "robomesh/pixel_alignment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <string>
#include <utility>

namespace robomesh {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double edge_value(const Vec2& u, const Vec2& v, const Vec2& p) {
  return (v.x() - u.x()) * (p.y() - u.y()) - (v.y() - u.y()) * (p.x() - u.x());
}

bool top_left(const Vec2& u, const Vec2& v) {
  const double dx = v.x() - u.x();
  const double dy = v.y() - u.y();
  return dy < 0.0 || (dy == 0.0 && dx > 0.0);
}

bool covers(double e, bool tl) { return e > 0.0 || (e == 0.0 && tl); }

struct OrientedTriangle {
  Vec2 a, b, c;
  int ia, ib, ic;
  double area;
};

// Returns false for zero-area or non-finite triangles.
bool orient(const Points2& px, const Faces& faces, Eigen::Index f, OrientedTriangle& tri) {
  tri.ia = faces(f, 0);
  tri.ib = faces(f, 1);
  tri.ic = faces(f, 2);
  tri.a = px.row(tri.ia).transpose();
  tri.b = px.row(tri.ib).transpose();
  tri.c = px.row(tri.ic).transpose();
  const Vec2 ab = tri.b - tri.a;
  const Vec2 ac = tri.c - tri.a;
  tri.area = ab.x() * ac.y() - ab.y() * ac.x();
  if (!std::isfinite(tri.area) || tri.area == 0.0) return false;
  if (tri.area < 0.0) {
    std::swap(tri.b, tri.c);
    std::swap(tri.ib, tri.ic);
    tri.area = -tri.area;
  }
  return true;
}

void check_faces(const Faces& faces, Eigen::Index vertex_count) {
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (faces(f, k) < 0 || faces(f, k) >= vertex_count) {
        throw InvariantError("face " + std::to_string(f) + " references vertex " + std::to_string(faces(f, k)));
      }
    }
  }
}

}  // namespace

RenderTarget rasterize_parts(const Points2& verts2d, std::span<const double> depths, const Faces& faces,
                             std::span<const int> part_of_face, int part_count, int width, int height) {
  if (static_cast<Eigen::Index>(depths.size()) != verts2d.rows()) {
    throw ShapeError("rasterize_parts: one depth per vertex required");
  }
  if (static_cast<Eigen::Index>(part_of_face.size()) != faces.rows()) {
    throw ShapeError("rasterize_parts: one part label per face required");
  }
  if (width <= 0 || height <= 0) throw InvariantError("rasterize_parts: empty target");
  check_faces(faces, verts2d.rows());

  RenderTarget rt;
  rt.width = width;
  rt.height = height;
  rt.background = part_count;
  const auto n = static_cast<std::size_t>(width) * height;
  rt.labels.assign(n, part_count);
  rt.depth.assign(n, kInf);
  rt.probability.assign(n, 0.0);

  const Points2 px = normalized_to_pixels(verts2d, width, height);
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    const int label = part_of_face[static_cast<std::size_t>(f)];
    if (label < 0 || label >= part_count) {
      throw InvariantError("rasterize_parts: face " + std::to_string(f) + " has label " + std::to_string(label));
    }
    OrientedTriangle t;
    if (!orient(px, faces, f, t)) continue;
    const double za = depths[static_cast<std::size_t>(t.ia)];
    const double zb = depths[static_cast<std::size_t>(t.ib)];
    const double zc = depths[static_cast<std::size_t>(t.ic)];
    const bool tl_bc = top_left(t.b, t.c);
    const bool tl_ca = top_left(t.c, t.a);
    const bool tl_ab = top_left(t.a, t.b);

    const double lo_x = std::min({t.a.x(), t.b.x(), t.c.x()});
    const double hi_x = std::max({t.a.x(), t.b.x(), t.c.x()});
    const double lo_y = std::min({t.a.y(), t.b.y(), t.c.y()});
    const double hi_y = std::max({t.a.y(), t.b.y(), t.c.y()});
    // One pixel of slack: the edge functions alone decide coverage, and their
    // rounding can admit a center that sits a hair outside the exact bbox.
    auto clamp_index = [](double v, int hi) { return static_cast<int>(std::clamp(v, -1.0, static_cast<double>(hi))); };
    const int c0 = std::max(0, clamp_index(std::ceil(lo_x - 0.5) - 1, width));
    const int c1 = std::min(width - 1, clamp_index(std::floor(hi_x - 0.5) + 1, width));
    const int r0 = std::max(0, clamp_index(std::ceil(lo_y - 0.5) - 1, height));
    const int r1 = std::min(height - 1, clamp_index(std::floor(hi_y - 0.5) + 1, height));

    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        const Vec2 p(c + 0.5, r + 0.5);
        const double e_bc = edge_value(t.b, t.c, p);
        const double e_ca = edge_value(t.c, t.a, p);
        const double e_ab = edge_value(t.a, t.b, p);
        if (!covers(e_bc, tl_bc) || !covers(e_ca, tl_ca) || !covers(e_ab, tl_ab)) continue;
        const double z = (e_bc * za + e_ca * zb + e_ab * zc) / t.area;
        const auto i = static_cast<std::size_t>(r) * width + c;
        if (z < rt.depth[i]) {
          rt.depth[i] = z;
          rt.labels[i] = label;
          rt.probability[i] = 1.0;
        }
      }
    }
  }
  return rt;
}

// ---------------------------------------------------------------------------

namespace {

struct ContourEdge {
  int a;
  int b;
  int opposite;  // third vertex of an adjacent face, marks the covered side
};

std::vector<ContourEdge> contour_edges(const Points2& px, const Faces& faces) {
  struct Use {
    int count = 0;
    int positive = 0;
    int opposite = -1;
  };
  std::map<std::pair<int, int>, Use> uses;
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    OrientedTriangle t;
    if (!orient(px, faces, f, t)) continue;
    // Winding sign of the face as given, before reorientation.
    const bool positive = t.ib == faces(f, 1);
    const int idx[3] = {faces(f, 0), faces(f, 1), faces(f, 2)};
    for (int k = 0; k < 3; ++k) {
      const int u = idx[k];
      const int v = idx[(k + 1) % 3];
      Use& use = uses[{std::min(u, v), std::max(u, v)}];
      ++use.count;
      use.positive += positive ? 1 : 0;
      if (use.opposite < 0) use.opposite = idx[(k + 2) % 3];
    }
  }
  std::vector<ContourEdge> out;
  for (const auto& [key, use] : uses) {
    const bool folded = use.count == 2 && use.positive == 1;
    if (use.count == 1 || folded || use.count > 2) {
      out.push_back({key.first, key.second, use.opposite});
    }
  }
  return out;
}

}  // namespace

SoftSilhouette soft_silhouette(const Points2& verts2d, const Faces& faces, double sigma, int width,
                               int height) {
  if (!(sigma > 0.0)) throw InvariantError("soft_silhouette: sigma must be positive");
  if (width <= 0 || height <= 0) throw InvariantError("soft_silhouette: empty target");
  check_faces(faces, verts2d.rows());

  const Points2 px = normalized_to_pixels(verts2d, width, height);
  std::vector<OrientedTriangle> tris;
  tris.reserve(static_cast<std::size_t>(faces.rows()));
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    OrientedTriangle t;
    if (orient(px, faces, f, t)) tris.push_back(t);
  }
  const std::vector<ContourEdge> edges = contour_edges(px, faces);

  SoftSilhouette out;
  out.width = width;
  out.height = height;
  const auto n = static_cast<std::size_t>(width) * height;
  out.probability.assign(n, 0.0);
  out.signed_distance.assign(n, kInf);
  out.margin.assign(n, kInf);
  out.offsets.assign(n + 1, 0);

  const double to_px_x = 0.5 * width;
  const double to_px_y = -0.5 * height;

  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const auto i = static_cast<std::size_t>(r) * width + c;
      out.offsets[i] = out.entries.size();
      const Vec2 p(c + 0.5, r + 0.5);

      bool inside = false;
      for (const auto& t : tris) {
        if (edge_value(t.b, t.c, p) >= 0.0 && edge_value(t.c, t.a, p) >= 0.0 && edge_value(t.a, t.b, p) >= 0.0) {
          inside = true;
          break;
        }
      }

      double best = kInf;
      double best_t = 0.0;
      Vec2 best_point = Vec2::Zero();
      const ContourEdge* best_edge = nullptr;
      for (const auto& e : edges) {
        const Vec2 a = px.row(e.a).transpose();
        const Vec2 b = px.row(e.b).transpose();
        const Vec2 ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        const Vec2 q = a + t * ab;
        const double dist = (p - q).norm();
        if (dist < best) {
          best = dist;
          best_t = t;
          best_point = q;
          best_edge = &e;
        }
      }
      if (best_edge == nullptr) {
        // Nothing rendered.
        out.offsets[i + 1] = out.entries.size();
        continue;
      }
      double margin = kInf;
      for (const auto& e : edges) {
        const Vec2 a = px.row(e.a).transpose();
        const Vec2 b = px.row(e.b).transpose();
        const Vec2 ab = b - a;
        const double len2 = ab.squaredNorm();
        const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        const Vec2 q = a + t * ab;
        if ((q - best_point).norm() <= 1e-9) continue;
        margin = std::min(margin, (p - q).norm() - best);
      }

      const double sign = inside ? -1.0 : 1.0;
      const double d = sign * best;
      const double prob = 1.0 / (1.0 + std::exp(d / sigma));
      out.signed_distance[i] = d;
      out.probability[i] = prob;
      out.margin[i] = margin;

      // d(dist)/d(a) = -(1 - t) n, d(dist)/d(b) = -t n with n the unit vector
      // from the closest point to the pixel.
      Vec2 n;
      double grad_sign = sign;
      if (best > 0.0) {
        n = (p - best_point) / best;
      } else {
        const Vec2 a = px.row(best_edge->a).transpose();
        const Vec2 b = px.row(best_edge->b).transpose();
        const Vec2 o = px.row(best_edge->opposite).transpose();
        n = Vec2(-(b - a).y(), (b - a).x()).normalized();
        if (n.dot(o - a) > 0.0) n = -n;  // point away from the covered side
        grad_sign = 1.0;
      }
      const double dp_dd = -prob * (1.0 - prob) / sigma;
      auto push = [&](int vertex, double w) {
        if (w == 0.0) return;
        const Vec2 g_px = dp_dd * grad_sign * (-w) * n;
        out.entries.push_back({vertex, Vec2(g_px.x() * to_px_x, g_px.y() * to_px_y)});
      };
      push(best_edge->a, 1.0 - best_t);
      push(best_edge->b, best_t);
      out.offsets[i + 1] = out.entries.size();
    }
  }
  out.offsets[n] = out.entries.size();
  return out;
}

LossWithGradient projected_silhouette_loss(std::span<const double> probability, std::span<const double> mask) {
  if (probability.size() != mask.size()) {
    throw ShapeError("projected_silhouette_loss: probability has " + std::to_string(probability.size()) +
                     " pixels, mask has " + std::to_string(mask.size()));
  }
  constexpr double lo = 1e-7;
  constexpr double hi = 1.0 - 1e-7;
  LossWithGradient out;
  out.gradient.assign(probability.size(), 0.0);
  if (probability.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(probability.size());
  double total = 0.0;
  for (std::size_t i = 0; i < probability.size(); ++i) {
    const double raw = probability[i];
    const double p = std::clamp(raw, lo, hi);
    const double m = mask[i];
    total += -(m * std::log(p) + (1.0 - m) * std::log(1.0 - p));
    if (raw > lo && raw < hi) {
      out.gradient[i] = (-m / p + (1.0 - m) / (1.0 - p)) * inv_n;
    }
  }
  out.loss = total * inv_n;
  return out;
}

CameraLossGradient silhouette_loss_camera_gradient(const Points3& points, const Faces& faces, const Camera& cam,
                                                   std::span<const double> mask, double sigma, int width,
                                                   int height) {
  const Points2 v2 = project(points, cam);
  const SoftSilhouette sil = soft_silhouette(v2, faces, sigma, width, height);
  const LossWithGradient lg = projected_silhouette_loss(sil.probability, mask);

  Points2 dv = Points2::Zero(v2.rows(), 2);
  for (std::size_t i = 0; i < sil.probability.size(); ++i) {
    if (lg.gradient[i] == 0.0) continue;
    for (const auto& g : sil.gradient(i)) {
      dv.row(g.vertex) += lg.gradient[i] * g.d.transpose();
    }
  }
  CameraLossGradient out;
  out.loss = lg.loss;
  for (Eigen::Index v = 0; v < dv.rows(); ++v) {
    out.d_scale += dv(v, 0) * points(v, 0) + dv(v, 1) * points(v, 1);
    out.d_translation += dv.row(v).transpose();
  }
  return out;
}

double projected_vertex_error(const Points2& pred, const Points2& gt) {
  if (pred.rows() != gt.rows()) {
    throw ShapeError("projected_vertex_error: " + std::to_string(pred.rows()) + " vs " +
                     std::to_string(gt.rows()) + " points");
  }
  if (pred.rows() == 0) return 0.0;
  return (pred - gt).rowwise().norm().mean();
}

void write_labels_pgm(const RenderTarget& target, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("write_labels_pgm: cannot open " + path.string());
  out << "P2\n" << target.width << ' ' << target.height << '\n' << target.background << '\n';
  for (int r = 0; r < target.height; ++r) {
    for (int c = 0; c < target.width; ++c) out << (c ? " " : "") << target.label(r, c);
    out << '\n';
  }
}

void write_grid_csv(std::span<const double> values, int width, int height, const std::filesystem::path& path) {
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("write_grid_csv: buffer does not match dimensions");
  }
  std::ofstream out(path);
  if (!out) throw Error("write_grid_csv: cannot open " + path.string());
  out.precision(9);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out << (c ? "," : "") << values[static_cast<std::size_t>(r) * width + c];
    out << '\n';
  }
}

}  // namespace robomesh
