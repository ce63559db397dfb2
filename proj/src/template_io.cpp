#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <nlohmann/json.hpp>

#include "robomesh/body_model.hpp"

namespace robomesh {

namespace {

constexpr char kMagic[5] = {'R', 'B', 'M', 'X', '1'};

static_assert(std::endian::native == std::endian::little,
              "template I/O assumes a little-endian host");

class Writer {
 public:
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  void raw(void* out, std::size_t n, const char* field) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("template file truncated while reading '") + field + "'");
    }
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::int32_t i32(const char* field) {
    std::int32_t v;
    raw(&v, sizeof v, field);
    return v;
  }
  double f64(const char* field) {
    double v;
    raw(&v, sizeof v, field);
    return v;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

// Row-major element order regardless of Eigen storage.
void write_matrix(Writer& w, const auto& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) w.f64(m(r, c));
  }
}

void read_matrix(Reader& rd, auto& m, const char* field) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rd.f64(field);
  }
}

std::int32_t checked_count(Reader& rd, const char* field, std::int32_t min_value) {
  const std::int32_t v = rd.i32(field);
  if (v < min_value || v > (1 << 24)) {
    throw ParseError(std::string("template header field '") + field + "' has invalid value " +
                     std::to_string(v));
  }
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode_template(const BodyModelTemplate& t) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.i32(t.vertex_count());
  w.i32(t.face_count());
  w.i32(t.joint_count());
  w.i32(t.part_count);
  w.i32(t.shape_count());
  w.i32(t.pose_blend_width());
  write_matrix(w, t.template_vertices);
  write_matrix(w, t.shape_blendshapes);
  write_matrix(w, t.pose_blendshapes);
  write_matrix(w, t.joint_regressor);
  write_matrix(w, t.skinning_weights);
  for (Eigen::Index f = 0; f < t.faces.rows(); ++f) {
    for (int k = 0; k < 3; ++k) w.i32(t.faces(f, k));
  }
  for (int p : t.parents) w.i32(p);
  for (int l : t.part_of_vertex) w.i32(l);
  return w.take();
}

BodyModelTemplate decode_template(const std::vector<std::uint8_t>& bytes) {
  Reader rd(bytes);
  char magic[5];
  rd.raw(magic, sizeof magic, "magic");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
    throw ParseError("template file: bad magic, expected \"RBMX1\"");
  }
  const int V = checked_count(rd, "V", 1);
  const int F = checked_count(rd, "F", 0);
  const int J = checked_count(rd, "J", 1);
  const int P = checked_count(rd, "P", 1);
  const int S = checked_count(rd, "S", 0);
  const int W = checked_count(rd, "pose_blend_width", 0);

  BodyModelTemplate t;
  t.part_count = P;
  t.template_vertices.resize(V, 3);
  read_matrix(rd, t.template_vertices, "template_vertices");
  t.shape_blendshapes.resize(3 * V, S);
  read_matrix(rd, t.shape_blendshapes, "shape_blendshapes");
  t.pose_blendshapes.resize(3 * V, W);
  read_matrix(rd, t.pose_blendshapes, "pose_blendshapes");
  t.joint_regressor.resize(J, V);
  read_matrix(rd, t.joint_regressor, "joint_regressor");
  t.skinning_weights.resize(V, J);
  read_matrix(rd, t.skinning_weights, "skinning_weights");
  t.faces.resize(F, 3);
  for (int f = 0; f < F; ++f) {
    for (int k = 0; k < 3; ++k) t.faces(f, k) = rd.i32("faces");
  }
  t.parents.resize(static_cast<std::size_t>(J));
  for (auto& p : t.parents) p = rd.i32("parents");
  t.part_of_vertex.resize(static_cast<std::size_t>(V));
  for (auto& l : t.part_of_vertex) l = rd.i32("part_of_vertex");
  if (!rd.done()) {
    throw ParseError("template file has trailing bytes after 'part_of_vertex'");
  }
  t.validate();
  return t;
}

// ---------------------------------------------------------------------------
// JSON mirror

namespace {

using nlohmann::json;

json matrix_json(const auto& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

// V x 3 x K tensor from a 3V x K flattened matrix.
json tensor_json(const MatX& m) {
  json out = json::array();
  for (Eigen::Index v = 0; v < m.rows() / 3; ++v) {
    json vert = json::array();
    for (int c = 0; c < 3; ++c) {
      json row = json::array();
      for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(3 * v + c, k));
      vert.push_back(std::move(row));
    }
    out.push_back(std::move(vert));
  }
  return out;
}

const json& field(const json& j, const char* name) {
  if (!j.contains(name)) {
    throw ParseError(std::string("template JSON is missing field '") + name + "'");
  }
  return j.at(name);
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> matrix_from_json(const json& j, const char* name,
                                                                        Eigen::Index want_cols = -1) {
  const json& rows = field(j, name);
  if (!rows.is_array()) throw ParseError(std::string("template JSON field '") + name + "' is not an array");
  const auto R = static_cast<Eigen::Index>(rows.size());
  Eigen::Index C = want_cols;
  if (C < 0) C = R > 0 && rows[0].is_array() ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> m(R, C);
  for (Eigen::Index r = 0; r < R; ++r) {
    const json& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != C) {
      throw ParseError(std::string("template JSON field '") + name + "' row " + std::to_string(r) +
                       " has the wrong length");
    }
    for (Eigen::Index c = 0; c < C; ++c) {
      const json& x = row[static_cast<std::size_t>(c)];
      if (!x.is_number()) {
        throw ParseError(std::string("template JSON field '") + name + "' has a non-numeric entry");
      }
      m(r, c) = x.get<Scalar>();
    }
  }
  return m;
}

MatX tensor_from_json(const json& j, const char* name, Eigen::Index V) {
  const json& t = field(j, name);
  if (!t.is_array() || static_cast<Eigen::Index>(t.size()) != V) {
    throw ParseError(std::string("template JSON field '") + name + "' must have one entry per vertex");
  }
  Eigen::Index K = -1;
  MatX m;
  for (Eigen::Index v = 0; v < V; ++v) {
    const json& vert = t[static_cast<std::size_t>(v)];
    if (!vert.is_array() || vert.size() != 3) {
      throw ParseError(std::string("template JSON field '") + name + "' vertex " + std::to_string(v) +
                       " must be a 3 x K array");
    }
    for (int c = 0; c < 3; ++c) {
      const json& row = vert[static_cast<std::size_t>(c)];
      if (!row.is_array()) throw ParseError(std::string("template JSON field '") + name + "' is malformed");
      if (K < 0) {
        K = static_cast<Eigen::Index>(row.size());
        m.resize(3 * V, K);
      }
      if (static_cast<Eigen::Index>(row.size()) != K) {
        throw ParseError(std::string("template JSON field '") + name + "' has ragged rows");
      }
      for (Eigen::Index k = 0; k < K; ++k) {
        const json& x = row[static_cast<std::size_t>(k)];
        if (!x.is_number()) throw ParseError(std::string("template JSON field '") + name + "' has a non-numeric entry");
        m(3 * v + c, k) = x.get<double>();
      }
    }
  }
  if (K < 0) m.resize(3 * V, 0);
  return m;
}

std::vector<int> ints_from_json(const json& j, const char* name) {
  const json& a = field(j, name);
  if (!a.is_array()) throw ParseError(std::string("template JSON field '") + name + "' is not an array");
  std::vector<int> out;
  out.reserve(a.size());
  for (const json& x : a) {
    if (!x.is_number_integer()) {
      throw ParseError(std::string("template JSON field '") + name + "' has a non-integer entry");
    }
    out.push_back(x.get<int>());
  }
  return out;
}

}  // namespace

std::string template_to_json(const BodyModelTemplate& t) {
  json j;
  j["format"] = "RBMX1-json";
  j["part_count"] = t.part_count;
  j["template_vertices"] = matrix_json(t.template_vertices);
  j["faces"] = matrix_json(t.faces);
  j["shape_blendshapes"] = tensor_json(t.shape_blendshapes);
  j["pose_blendshapes"] = tensor_json(t.pose_blendshapes);
  j["joint_regressor"] = matrix_json(t.joint_regressor);
  j["skinning_weights"] = matrix_json(t.skinning_weights);
  j["parents"] = t.parents;
  j["part_of_vertex"] = t.part_of_vertex;
  return j.dump();
}

BodyModelTemplate template_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("template JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("template JSON: top level must be an object");
  BodyModelTemplate t;
  const json& pc = field(j, "part_count");
  if (!pc.is_number_integer()) throw ParseError("template JSON field 'part_count' must be an integer");
  t.part_count = pc.get<int>();
  t.template_vertices = matrix_from_json<double>(j, "template_vertices", 3);
  const Eigen::Index V = t.template_vertices.rows();
  t.faces = matrix_from_json<int>(j, "faces", 3);
  t.shape_blendshapes = tensor_from_json(j, "shape_blendshapes", V);
  t.pose_blendshapes = tensor_from_json(j, "pose_blendshapes", V);
  t.joint_regressor = matrix_from_json<double>(j, "joint_regressor", V);
  t.parents = ints_from_json(j, "parents");
  t.skinning_weights = matrix_from_json<double>(j, "skinning_weights", static_cast<Eigen::Index>(t.parents.size()));
  t.part_of_vertex = ints_from_json(j, "part_of_vertex");
  t.validate();
  return t;
}

void save_template(const BodyModelTemplate& tmpl, const std::filesystem::path& path) {
  const auto bytes = encode_template(tmpl);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("save_template: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("save_template: write failed for " + path.string());
}

BodyModelTemplate load_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("load_template: cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t first = 0;
  while (first < bytes.size() && std::isspace(bytes[first])) ++first;
  if (first < bytes.size() && bytes[first] == '{') {
    return template_from_json(std::string(bytes.begin(), bytes.end()));
  }
  return decode_template(bytes);
}

}  // namespace robomesh
