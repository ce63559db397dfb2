#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "robomesh/camera.hpp"
#include "robomesh/types.hpp"

namespace robomesh {

/// Rigged mesh template in the SMPL family layout.
///
/// Blendshape tensors are stored flattened: row `3*v + c` holds coordinate `c`
/// of vertex `v`, one column per coefficient. That is the row-major layout of a
/// V x 3 x S tensor, which is also the on-disk order.
struct BodyModelTemplate {
  static constexpr int kRootParent = -1;

  Points3 template_vertices;     // V x 3, meters
  Faces faces;                   // F x 3
  MatX shape_blendshapes;        // 3V x S
  MatX pose_blendshapes;         // 3V x 9(J-1)
  MatX joint_regressor;          // J x V
  MatX skinning_weights;         // V x J
  std::vector<int> parents;      // J, parents[0] == kRootParent
  std::vector<int> part_of_vertex;  // V, labels in [0, part_count)
  int part_count = 0;

  int vertex_count() const { return static_cast<int>(template_vertices.rows()); }
  int face_count() const { return static_cast<int>(faces.rows()); }
  int joint_count() const { return static_cast<int>(parents.size()); }
  int shape_count() const { return static_cast<int>(shape_blendshapes.cols()); }
  int pose_blend_width() const { return static_cast<int>(pose_blendshapes.cols()); }

  /// Throws InvariantError (or ShapeError) naming the offending field.
  void validate() const;

  /// Indices of joints that have no children.
  std::vector<int> leaf_joints() const;

  /// Majority part label over each face's vertices; ties go to the lowest label.
  std::vector<int> part_of_face() const;

  bool operator==(const BodyModelTemplate&) const = default;
};

/// Part/joint counts of the three subnetworks. Templates with these counts are representable.
struct PartJointCounts {
  int parts;
  int joints;
};
inline constexpr PartJointCounts kBodyCounts{24, 137};
inline constexpr PartJointCounts kHandCounts{16, 21};
inline constexpr PartJointCounts kFaceCounts{15, 73};

struct BodyParams {
  Vec3 global_orient = Vec3::Zero();
  Points3 pose;                // (J-1) x 3 axis-angle
  VecX shape;                  // S
  VecX expression;             // E; carried for parameter losses, not consumed by forward()
  Camera camera;

  /// Zero pose/shape/expression with identity camera, sized for `tmpl`.
  static BodyParams rest(const BodyModelTemplate& tmpl, int expression_dims = 10);

  bool operator==(const BodyParams&) const = default;
};

struct ForwardResult {
  Points3 vertices;
  Points3 joints;  // posed joint locations (kinematic tree)
};

/// Shape + pose blendshapes followed by linear blend skinning. The root joint
/// keeps its rest position; every rotation, global orientation included, pivots
/// about its joint.
ForwardResult forward(const BodyModelTemplate& tmpl, const BodyParams& params);

/// Per-joint 4x4 skinning transforms A_j (posed-from-rest, including the rest
/// joint offset), exposed for skinning diagnostics.
std::vector<Eigen::Matrix4d> skinning_transforms(const BodyModelTemplate& tmpl,
                                                 const BodyParams& params);

Points3 regress_joints(const Points3& vertices, const MatX& regressor);

/// Binary container, magic "RBMX1". See README for the layout.
void save_template(const BodyModelTemplate& tmpl, const std::filesystem::path& path);
/// Accepts the binary container or the JSON mirror (detected from content).
BodyModelTemplate load_template(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_template(const BodyModelTemplate& tmpl);
BodyModelTemplate decode_template(const std::vector<std::uint8_t>& bytes);

std::string template_to_json(const BodyModelTemplate& tmpl);
BodyModelTemplate template_from_json(const std::string& text);

struct SyntheticTemplateOptions {
  int shape_count = 4;
  double limb_half_width = 0.04;
  double pose_blend_scale = 1e-3;
  std::uint64_t seed = 7;
};

/// Box-limbed stick figure with a 9-joint tree (pelvis root), one part per
/// driving joint, a closed mesh, and small random pose blendshapes.
BodyModelTemplate make_synthetic_template(const SyntheticTemplateOptions& options = {});

}  // namespace robomesh
