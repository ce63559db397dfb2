#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "robomesh/body_model.hpp"
#include "robomesh/rotation.hpp"

using namespace robomesh;
using oracle::Rng;

namespace {

double max_abs(const MatX& m) { return m.cwiseAbs().maxCoeff(); }

Points3 root_relative(const ForwardResult& r) { return r.vertices.rowwise() - r.joints.row(0); }

BodyParams random_params(const BodyModelTemplate& t, Rng& rng, double pose_sd = 0.5) {
  BodyParams p = BodyParams::rest(t);
  p.global_orient = rng.gaussian3(pose_sd);
  for (Eigen::Index j = 0; j < p.pose.rows(); ++j) p.pose.row(j) = rng.gaussian3(pose_sd).transpose();
  for (Eigen::Index k = 0; k < p.shape.size(); ++k) p.shape(k) = rng.normal();
  return p;
}

}  // namespace

TEST_CASE("two-bone chain matches hand-composed transforms") {
  const BodyModelTemplate t = oracle::two_bone();
  t.validate();
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    BodyParams p = BodyParams::rest(t);
    p.global_orient = rng.gaussian3(0.8);
    p.pose.row(0) = rng.gaussian3(0.8).transpose();
    p.pose.row(1) = rng.gaussian3(0.8).transpose();
    const auto [verts, joints] = oracle::two_bone_pose(p);
    const ForwardResult r = forward(t, p);
    CHECK(max_abs(r.vertices - verts) < 1e-12);
    CHECK(max_abs(r.joints - joints) < 1e-12);
  }
}

TEST_CASE("synthetic template is well formed") {
  const BodyModelTemplate t = make_synthetic_template();
  CHECK_NOTHROW(t.validate());
  CHECK(t.vertex_count() == 104);
  CHECK(t.face_count() == 156);
  CHECK(t.joint_count() == 9);
  CHECK(t.part_count == 9);
  CHECK(t.shape_count() == 4);
  CHECK(t.pose_blend_width() == 72);
  CHECK(t.leaf_joints() == std::vector<int>{2, 4, 6, 7, 8});
  // deterministic
  CHECK(t == make_synthetic_template());
  SyntheticTemplateOptions o;
  o.seed = 8;
  CHECK_FALSE(t == make_synthetic_template(o));
}

TEST_CASE("rest pose returns the template") {
  const BodyModelTemplate t = make_synthetic_template();
  const ForwardResult r = forward(t, BodyParams::rest(t));
  CHECK(max_abs(r.vertices - t.template_vertices) <= 1e-12);
  CHECK(max_abs(r.joints - t.joint_regressor * t.template_vertices) <= 1e-12);
}

TEST_CASE("shape only moves vertices along the shape blendshapes") {
  const BodyModelTemplate t = make_synthetic_template();
  Rng rng(22);
  BodyParams p = BodyParams::rest(t);
  for (Eigen::Index k = 0; k < p.shape.size(); ++k) p.shape(k) = rng.normal();
  const ForwardResult r = forward(t, p);
  const VecX offs = t.shape_blendshapes * p.shape;
  for (int v = 0; v < t.vertex_count(); ++v) {
    for (int c = 0; c < 3; ++c) {
      CHECK(r.vertices(v, c) == doctest::Approx(t.template_vertices(v, c) + offs(3 * v + c)).epsilon(1e-12));
    }
  }
}

TEST_CASE("global rotation is equivariant about the root") {
  const BodyModelTemplate t = make_synthetic_template();
  Rng rng(23);
  for (int i = 0; i < 50; ++i) {
    BodyParams p = random_params(t, rng);
    const Mat3 Q = oracle::random_rotation(rng);
    BodyParams q = p;
    q.global_orient = rotation_log(Q * rodrigues(p.global_orient));
    const Points3 a = root_relative(forward(t, p));
    const Points3 b = root_relative(forward(t, q));
    CHECK(max_abs(b - a * Q.transpose()) <= 1e-9);
  }
}

TEST_CASE("skinning weights stay a partition of unity so translations pass through") {
  const BodyModelTemplate t = make_synthetic_template();
  Rng rng(24);
  const BodyParams p = random_params(t, rng);
  BodyModelTemplate shifted = t;
  const Eigen::RowVector3d d(0.3, -1.0, 2.0);
  shifted.template_vertices = t.template_vertices.rowwise() + d;
  const ForwardResult a = forward(t, p);
  const ForwardResult b = forward(shifted, p);
  // rest joints shift by d, the root stays put, so the whole posed mesh shifts by d
  CHECK(max_abs((b.vertices.rowwise() - d) - a.vertices) < 1e-12);
}

TEST_CASE("skinning_transforms and regress_joints agree with forward") {
  const BodyModelTemplate t = make_synthetic_template();
  Rng rng(25);
  const BodyParams p = random_params(t, rng);
  const auto A = skinning_transforms(t, p);
  REQUIRE(A.size() == 9u);
  for (const auto& m : A) {
    CHECK((m.topLeftCorner<3, 3>().transpose() * m.topLeftCorner<3, 3>() - Mat3::Identity()).norm() < 1e-12);
    CHECK(m(3, 3) == 1.0);
  }
  const Points3 J = regress_joints(t.template_vertices, t.joint_regressor);
  CHECK(max_abs(J - t.joint_regressor * t.template_vertices) < 1e-15);
}

TEST_CASE("forward rejects mismatched parameters") {
  const BodyModelTemplate t = make_synthetic_template();
  BodyParams p = BodyParams::rest(t);
  p.pose.resize(3, 3);
  CHECK_THROWS_AS(forward(t, p), ShapeError);
  p = BodyParams::rest(t);
  p.shape.resize(2);
  CHECK_THROWS_AS(forward(t, p), ShapeError);
}

TEST_CASE("validate names the offending field") {
  const BodyModelTemplate base = make_synthetic_template();
  auto message_of = [](const BodyModelTemplate& t) -> std::string {
    try {
      t.validate();
    } catch (const Error& e) {
      return e.what();
    }
    return "";
  };
  BodyModelTemplate t = base;
  t.skinning_weights(3, 0) += 0.1;
  CHECK(message_of(t).find("skinning_weights") != std::string::npos);
  t = base;
  t.parents[3] = 5;
  CHECK(message_of(t).find("parents") != std::string::npos);
  t = base;
  t.faces(0, 0) = 1000;
  CHECK(message_of(t).find("faces") != std::string::npos);
  t = base;
  t.part_of_vertex[0] = 99;
  CHECK(message_of(t).find("part_of_vertex") != std::string::npos);
  t = base;
  t.joint_regressor.conservativeResize(8, Eigen::NoChange);
  CHECK(message_of(t).find("joint_regressor") != std::string::npos);
}

TEST_CASE("template binary round trip is exact") {
  const BodyModelTemplate t = make_synthetic_template();
  const auto bytes = encode_template(t);
  CHECK(std::string(bytes.begin(), bytes.begin() + 5) == "RBMX1");
  CHECK(decode_template(bytes) == t);

  const auto path = std::filesystem::temp_directory_path() / "robomesh_test_template.rbmx";
  save_template(t, path);
  CHECK(load_template(path) == t);
  std::filesystem::remove(path);
}

TEST_CASE("template JSON round trip is exact") {
  const BodyModelTemplate t = make_synthetic_template();
  CHECK(template_from_json(template_to_json(t)) == t);
  const auto path = std::filesystem::temp_directory_path() / "robomesh_test_template.json";
  {
    std::ofstream f(path);
    f << template_to_json(t);
  }
  CHECK(load_template(path) == t);
  std::filesystem::remove(path);
}

TEST_CASE("corrupt template files are rejected") {
  const BodyModelTemplate t = make_synthetic_template();
  auto bytes = encode_template(t);
  SUBCASE("truncated") {
    for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() / 2, bytes.size() - 1}) {
      std::vector<std::uint8_t> b(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK_THROWS_AS(decode_template(b), ParseError);
    }
  }
  SUBCASE("bad magic") {
    bytes[0] = 'X';
    CHECK_THROWS_AS(decode_template(bytes), ParseError);
  }
  SUBCASE("trailing bytes") {
    bytes.push_back(0);
    CHECK_THROWS_AS(decode_template(bytes), ParseError);
  }
  SUBCASE("json missing field") {
    auto j = nlohmann::json::parse(template_to_json(t));
    j.erase("skinning_weights");
    try {
      template_from_json(j.dump());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("skinning_weights") != std::string::npos);
    }
  }
  SUBCASE("json with an invalid template") {
    auto j = nlohmann::json::parse(template_to_json(t));
    j["parents"][0] = 0;
    CHECK_THROWS_AS(template_from_json(j.dump()), Error);
  }
}

TEST_CASE("part_of_face takes the majority with ties to the lowest label") {
  BodyModelTemplate t = oracle::two_bone();
  // face 0 = {0,1,3} -> parts {0,1,1}; face 1 = {2,4,5} -> {2,2,2}
  CHECK(t.part_of_face() == std::vector<int>{1, 2});
  t.part_of_vertex = {2, 1, 2, 0, 2, 2};
  // face 0 -> {2,1,0}: all tie, lowest wins
  CHECK(t.part_of_face()[0] == 0);
}

TEST_CASE("subnetwork part/joint counts are representable") {
  for (auto counts : {kBodyCounts, kHandCounts, kFaceCounts}) {
    BodyModelTemplate t;
    const int J = counts.joints;
    t.template_vertices = Points3::Random(J, 3);
    t.faces.resize(0, 3);
    t.shape_blendshapes = MatX::Zero(3 * J, 1);
    t.pose_blendshapes = MatX::Zero(3 * J, 9 * (J - 1));
    t.joint_regressor = MatX::Identity(J, J);
    t.skinning_weights = MatX::Identity(J, J);
    t.parents.resize(static_cast<std::size_t>(J));
    t.parents[0] = -1;
    for (int j = 1; j < J; ++j) t.parents[static_cast<std::size_t>(j)] = (j - 1) / 2;
    t.part_of_vertex.resize(static_cast<std::size_t>(J));
    for (int j = 0; j < J; ++j) t.part_of_vertex[static_cast<std::size_t>(j)] = j % counts.parts;
    t.part_count = counts.parts;
    CHECK_NOTHROW(t.validate());
    CHECK(decode_template(encode_template(t)) == t);
  }
}
