#include "robomesh/body_model.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "robomesh/rotation.hpp"

namespace robomesh {

namespace {

std::string dims(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

void require_shape(const char* field, Eigen::Index rows, Eigen::Index cols, Eigen::Index want_rows,
                   Eigen::Index want_cols) {
  if (rows != want_rows || cols != want_cols) {
    throw ShapeError(std::string("template field '") + field + "' has shape " + dims(rows, cols) +
                     ", expected " + dims(want_rows, want_cols));
  }
}

void require_rows_sum_to_one(const char* field, const MatX& m, bool non_negative) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double sum = m.row(r).sum();
    if (!std::isfinite(sum) || std::abs(sum - 1.0) > 1e-6) {
      throw InvariantError(std::string("template field '") + field + "' row " + std::to_string(r) +
                           " sums to " + std::to_string(sum) + ", expected 1");
    }
    if (non_negative && m.row(r).minCoeff() < 0.0) {
      throw InvariantError(std::string("template field '") + field + "' row " + std::to_string(r) +
                           " has a negative entry");
    }
  }
}

}  // namespace

void BodyModelTemplate::validate() const {
  const Eigen::Index V = template_vertices.rows();
  const Eigen::Index J = static_cast<Eigen::Index>(parents.size());
  if (V == 0) throw InvariantError("template field 'template_vertices' is empty");
  if (J == 0) throw InvariantError("template field 'parents' is empty");
  if (part_count < 1) throw InvariantError("template field 'part_count' must be >= 1");

  require_shape("shape_blendshapes", shape_blendshapes.rows(), shape_blendshapes.cols(), 3 * V,
                shape_blendshapes.cols());
  if (pose_blendshapes.size() != 0 || pose_blendshapes.rows() != 0) {
    require_shape("pose_blendshapes", pose_blendshapes.rows(), pose_blendshapes.cols(), 3 * V,
                  9 * (J - 1));
  }
  require_shape("joint_regressor", joint_regressor.rows(), joint_regressor.cols(), J, V);
  require_shape("skinning_weights", skinning_weights.rows(), skinning_weights.cols(), V, J);
  if (static_cast<Eigen::Index>(part_of_vertex.size()) != V) {
    throw ShapeError("template field 'part_of_vertex' has length " +
                     std::to_string(part_of_vertex.size()) + ", expected " + std::to_string(V));
  }
  if (!template_vertices.allFinite()) {
    throw InvariantError("template field 'template_vertices' contains non-finite values");
  }

  require_rows_sum_to_one("skinning_weights", skinning_weights, true);
  require_rows_sum_to_one("joint_regressor", joint_regressor, false);

  if (parents[0] != kRootParent) {
    throw InvariantError("template field 'parents': joint 0 must be the root");
  }
  for (Eigen::Index j = 1; j < J; ++j) {
    const int p = parents[static_cast<std::size_t>(j)];
    if (p < 0 || p >= j) {
      throw InvariantError("template field 'parents': joint " + std::to_string(j) + " has parent " +
                           std::to_string(p) + "; parents must precede children and only joint 0 is a root");
    }
  }
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    for (int k = 0; k < 3; ++k) {
      if (faces(f, k) < 0 || faces(f, k) >= V) {
        throw InvariantError("template field 'faces': face " + std::to_string(f) +
                             " references vertex " + std::to_string(faces(f, k)));
      }
    }
  }
  for (std::size_t v = 0; v < part_of_vertex.size(); ++v) {
    if (part_of_vertex[v] < 0 || part_of_vertex[v] >= part_count) {
      throw InvariantError("template field 'part_of_vertex': vertex " + std::to_string(v) +
                           " has label " + std::to_string(part_of_vertex[v]) + ", part_count is " +
                           std::to_string(part_count));
    }
  }
}

std::vector<int> BodyModelTemplate::leaf_joints() const {
  std::vector<bool> has_child(parents.size(), false);
  for (std::size_t j = 1; j < parents.size(); ++j) {
    has_child[static_cast<std::size_t>(parents[j])] = true;
  }
  std::vector<int> leaves;
  for (std::size_t j = 0; j < parents.size(); ++j) {
    if (!has_child[j]) leaves.push_back(static_cast<int>(j));
  }
  return leaves;
}

std::vector<int> BodyModelTemplate::part_of_face() const {
  std::vector<int> out(static_cast<std::size_t>(faces.rows()));
  for (Eigen::Index f = 0; f < faces.rows(); ++f) {
    const int a = part_of_vertex[static_cast<std::size_t>(faces(f, 0))];
    const int b = part_of_vertex[static_cast<std::size_t>(faces(f, 1))];
    const int c = part_of_vertex[static_cast<std::size_t>(faces(f, 2))];
    int label;
    if (a == b || a == c) {
      label = a;
    } else if (b == c) {
      label = b;
    } else {
      label = std::min({a, b, c});
    }
    out[static_cast<std::size_t>(f)] = label;
  }
  return out;
}

BodyParams BodyParams::rest(const BodyModelTemplate& tmpl, int expression_dims) {
  BodyParams p;
  p.pose = Points3::Zero(std::max(tmpl.joint_count() - 1, 0), 3);
  p.shape = VecX::Zero(tmpl.shape_count());
  p.expression = VecX::Zero(expression_dims);
  return p;
}

namespace {

struct Kinematics {
  Points3 v_posed;
  Points3 rest_joints;
  std::vector<Mat3> world_rot;
  std::vector<Vec3> world_trans;
};

Kinematics pose_kinematics(const BodyModelTemplate& tmpl, const BodyParams& params) {
  const int V = tmpl.vertex_count();
  const int J = tmpl.joint_count();
  if (params.pose.rows() != J - 1) {
    throw ShapeError("forward: pose has " + std::to_string(params.pose.rows()) +
                     " joints, template expects " + std::to_string(J - 1));
  }
  if (params.shape.size() != tmpl.shape_count()) {
    throw ShapeError("forward: shape has " + std::to_string(params.shape.size()) +
                     " coefficients, template expects " + std::to_string(tmpl.shape_count()));
  }

  Kinematics k;
  Points3 v_shaped = tmpl.template_vertices;
  if (tmpl.shape_count() > 0) {
    const VecX offsets = tmpl.shape_blendshapes * params.shape;
    v_shaped += Eigen::Map<const Points3>(offsets.data(), V, 3);
  }
  k.rest_joints = tmpl.joint_regressor * v_shaped;

  std::vector<Mat3> local(static_cast<std::size_t>(J));
  local[0] = rodrigues(params.global_orient);
  for (int j = 1; j < J; ++j) {
    local[static_cast<std::size_t>(j)] = rodrigues(params.pose.row(j - 1).transpose());
  }

  k.v_posed = v_shaped;
  if (tmpl.pose_blend_width() > 0) {
    // vec(R - I) per non-root joint, row-major.
    VecX feature(9 * (J - 1));
    for (int j = 1; j < J; ++j) {
      const Mat3 d = local[static_cast<std::size_t>(j)] - Mat3::Identity();
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) feature(9 * (j - 1) + 3 * r + c) = d(r, c);
      }
    }
    const VecX offsets = tmpl.pose_blendshapes * feature;
    k.v_posed += Eigen::Map<const Points3>(offsets.data(), V, 3);
  }

  k.world_rot.resize(static_cast<std::size_t>(J));
  k.world_trans.resize(static_cast<std::size_t>(J));
  k.world_rot[0] = local[0];
  k.world_trans[0] = k.rest_joints.row(0).transpose();
  for (int j = 1; j < J; ++j) {
    const auto p = static_cast<std::size_t>(tmpl.parents[static_cast<std::size_t>(j)]);
    const auto ju = static_cast<std::size_t>(j);
    const Vec3 offset = (k.rest_joints.row(j) - k.rest_joints.row(static_cast<Eigen::Index>(p))).transpose();
    k.world_rot[ju] = k.world_rot[p] * local[ju];
    k.world_trans[ju] = k.world_rot[p] * offset + k.world_trans[p];
  }
  return k;
}

}  // namespace

std::vector<Eigen::Matrix4d> skinning_transforms(const BodyModelTemplate& tmpl,
                                                 const BodyParams& params) {
  const Kinematics k = pose_kinematics(tmpl, params);
  std::vector<Eigen::Matrix4d> out(k.world_rot.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    Eigen::Matrix4d A = Eigen::Matrix4d::Identity();
    A.topLeftCorner<3, 3>() = k.world_rot[j];
    A.topRightCorner<3, 1>() =
        k.world_trans[j] - k.world_rot[j] * k.rest_joints.row(static_cast<Eigen::Index>(j)).transpose();
    out[j] = A;
  }
  return out;
}

ForwardResult forward(const BodyModelTemplate& tmpl, const BodyParams& params) {
  const Kinematics k = pose_kinematics(tmpl, params);
  const int V = tmpl.vertex_count();
  const int J = tmpl.joint_count();

  std::vector<Vec3> skin_trans(static_cast<std::size_t>(J));
  for (int j = 0; j < J; ++j) {
    const auto ju = static_cast<std::size_t>(j);
    skin_trans[ju] = k.world_trans[ju] - k.world_rot[ju] * k.rest_joints.row(j).transpose();
  }

  ForwardResult out;
  out.vertices.resize(V, 3);
  for (int v = 0; v < V; ++v) {
    const Vec3 x = k.v_posed.row(v).transpose();
    Vec3 acc = Vec3::Zero();
    for (int j = 0; j < J; ++j) {
      const double w = tmpl.skinning_weights(v, j);
      if (w == 0.0) continue;
      const auto ju = static_cast<std::size_t>(j);
      acc += w * (k.world_rot[ju] * x + skin_trans[ju]);
    }
    out.vertices.row(v) = acc.transpose();
  }
  out.joints.resize(J, 3);
  for (int j = 0; j < J; ++j) {
    out.joints.row(j) = k.world_trans[static_cast<std::size_t>(j)].transpose();
  }
  return out;
}

Points3 regress_joints(const Points3& vertices, const MatX& regressor) {
  if (regressor.cols() != vertices.rows()) {
    throw ShapeError("regress_joints: regressor has " + std::to_string(regressor.cols()) +
                     " columns but there are " + std::to_string(vertices.rows()) + " vertices");
  }
  return regressor * vertices;
}

// ---------------------------------------------------------------------------
// Synthetic template

namespace {

struct BoxSpec {
  Vec3 from;
  Vec3 to;
  int part;
  // Proximal ring weights, distal ring weights: (joint, weight) pairs.
  std::vector<std::pair<int, double>> proximal;
  std::vector<std::pair<int, double>> distal;
};

void append_box(BodyModelTemplate& t, std::vector<std::vector<std::pair<int, double>>>& weights,
                std::vector<Vec3>& verts, std::vector<Eigen::Vector3i>& faces, const BoxSpec& box,
                double half_width) {
  const Vec3 d = (box.to - box.from).normalized();
  Vec3 u = std::abs(d.z()) < 0.9 ? d.cross(Vec3::UnitZ()) : d.cross(Vec3::UnitX());
  u.normalize();
  const Vec3 w = d.cross(u);
  const int base = static_cast<int>(verts.size());
  constexpr double signs[4][2] = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  for (int end = 0; end < 2; ++end) {
    const Vec3& c = end == 0 ? box.from : box.to;
    for (const auto& s : signs) {
      verts.push_back(c + half_width * (s[0] * u + s[1] * w));
      weights.push_back(end == 0 ? box.proximal : box.distal);
      t.part_of_vertex.push_back(box.part);
    }
  }
  auto tri = [&](int a, int b, int c) { faces.emplace_back(base + a, base + b, base + c); };
  tri(0, 2, 1);
  tri(0, 3, 2);
  tri(4, 5, 6);
  tri(4, 6, 7);
  for (int k = 0; k < 4; ++k) {
    const int k1 = (k + 1) % 4;
    tri(k, k1, k1 + 4);
    tri(k, k1 + 4, k + 4);
  }
}

}  // namespace

BodyModelTemplate make_synthetic_template(const SyntheticTemplateOptions& options) {
  // pelvis, chest, head, l_elbow, l_hand, r_elbow, r_hand, l_knee, r_knee
  const std::vector<Vec3> joints = {
      {0.0, 0.0, 0.0},   {0.0, 0.35, 0.0},   {0.0, 0.6, 0.0},    {0.25, 0.35, 0.0}, {0.5, 0.35, 0.0},
      {-0.25, 0.35, 0.0}, {-0.5, 0.35, 0.0}, {0.12, -0.45, 0.0}, {-0.12, -0.45, 0.0}};
  const std::vector<int> parents = {BodyModelTemplate::kRootParent, 0, 1, 1, 3, 1, 5, 0, 0};
  const int J = static_cast<int>(joints.size());

  BodyModelTemplate t;
  t.parents = parents;
  t.part_count = J;

  std::vector<Vec3> verts;
  std::vector<Eigen::Vector3i> faces;
  std::vector<std::vector<std::pair<int, double>>> weights;
  // First vertex of the proximal ring that is centered on each joint.
  std::vector<int> ring_of_joint(static_cast<std::size_t>(J), -1);

  auto proximal_weights = [&](int j) -> std::vector<std::pair<int, double>> {
    const int p = parents[static_cast<std::size_t>(j)];
    if (p < 0) return {{j, 1.0}};
    return {{j, 0.5}, {p, 0.5}};
  };

  for (int c = 1; c < J; ++c) {
    const int p = parents[static_cast<std::size_t>(c)];
    if (ring_of_joint[static_cast<std::size_t>(p)] < 0) {
      ring_of_joint[static_cast<std::size_t>(p)] = static_cast<int>(verts.size());
    }
    append_box(t, weights, verts, faces,
               {joints[static_cast<std::size_t>(p)], joints[static_cast<std::size_t>(c)], p,
                proximal_weights(p), {{p, 1.0}}},
               options.limb_half_width);
  }
  for (int leaf : t.leaf_joints()) {
    const auto lu = static_cast<std::size_t>(leaf);
    const Vec3 dir = (joints[lu] - joints[static_cast<std::size_t>(parents[lu])]).normalized();
    ring_of_joint[lu] = static_cast<int>(verts.size());
    append_box(t, weights, verts, faces,
               {joints[lu], joints[lu] + 0.15 * dir, leaf, proximal_weights(leaf), {{leaf, 1.0}}},
               options.limb_half_width);
  }

  const int V = static_cast<int>(verts.size());
  t.template_vertices.resize(V, 3);
  for (int v = 0; v < V; ++v) t.template_vertices.row(v) = verts[static_cast<std::size_t>(v)].transpose();
  t.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    t.faces.row(static_cast<Eigen::Index>(f)) = faces[f].transpose();
  }

  t.skinning_weights = MatX::Zero(V, J);
  for (int v = 0; v < V; ++v) {
    for (const auto& [j, w] : weights[static_cast<std::size_t>(v)]) t.skinning_weights(v, j) += w;
  }

  t.joint_regressor = MatX::Zero(J, V);
  for (int j = 0; j < J; ++j) {
    for (int k = 0; k < 4; ++k) t.joint_regressor(j, ring_of_joint[static_cast<std::size_t>(j)] + k) = 0.25;
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int S = options.shape_count;
  t.shape_blendshapes = MatX::Zero(3 * V, S);
  for (int s = 0; s < S; ++s) {
    for (int v = 0; v < V; ++v) {
      const Vec3 x = t.template_vertices.row(v).transpose();
      Vec3 d;
      switch (s) {
        case 0: d = {0.0, 0.05 * x.y(), 0.0}; break;   // height
        case 1: d = {0.05 * x.x(), 0.0, 0.0}; break;   // span
        case 2: d = {0.0, 0.0, 0.5 * x.z()}; break;    // thickness
        default: d = {0.005 * normal(rng), 0.005 * normal(rng), 0.005 * normal(rng)}; break;
      }
      t.shape_blendshapes.block<3, 1>(3 * v, s) = d;
    }
  }

  t.pose_blendshapes = MatX(3 * V, 9 * (J - 1));
  for (Eigen::Index i = 0; i < t.pose_blendshapes.size(); ++i) {
    t.pose_blendshapes.data()[i] = options.pose_blend_scale * normal(rng);
  }

  t.validate();
  return t;
}

}  // namespace robomesh
