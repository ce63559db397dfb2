#include "robomesh/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "robomesh/metrics.hpp"
#include "robomesh/pixel_alignment.hpp"

namespace robomesh {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Synthetic data

RenderedBody render_body(const BodyModelTemplate& tmpl, const BodyParams& params, int width, int height) {
  const ForwardResult fr = forward(tmpl, params);
  const Eigen::RowVector3d root = fr.joints.row(0);
  RenderedBody out;
  out.vertices = fr.vertices.rowwise() - root;
  out.joints = fr.joints.rowwise() - root;
  out.vertices2d = project(out.vertices, params.camera);
  out.joints2d = project(out.joints, params.camera);
  std::vector<double> depths(static_cast<std::size_t>(out.vertices.rows()));
  for (Eigen::Index v = 0; v < out.vertices.rows(); ++v) depths[static_cast<std::size_t>(v)] = out.vertices(v, 2);
  const std::vector<int> face_parts = tmpl.part_of_face();
  out.labels = rasterize_parts(out.vertices2d, depths, tmpl.faces, face_parts, tmpl.part_count, width, height).labels;
  return out;
}

std::vector<std::vector<int>> resolve_part_groups(const BodyModelTemplate& tmpl, const DatasetConfig& cfg) {
  std::vector<std::vector<int>> candidates = cfg.part_groups;
  if (candidates.empty()) {
    for (int leaf : tmpl.leaf_joints()) {
      // Part driven by the leaf joint: majority label among vertices it fully owns.
      std::vector<int> counts(static_cast<std::size_t>(tmpl.part_count), 0);
      for (int v = 0; v < tmpl.vertex_count(); ++v) {
        if (tmpl.skinning_weights(v, leaf) == 1.0) ++counts[static_cast<std::size_t>(tmpl.part_of_vertex[static_cast<std::size_t>(v)])];
      }
      const auto it = std::max_element(counts.begin(), counts.end());
      if (*it > 0) candidates.push_back({static_cast<int>(it - counts.begin())});
    }
  }
  std::vector<std::vector<int>> groups;
  for (auto& g : candidates) {
    int members = 0;
    for (int label : tmpl.part_of_vertex) {
      if (std::find(g.begin(), g.end(), label) != g.end()) ++members;
    }
    if (members >= 2) groups.push_back(g);
  }
  return groups;
}

std::vector<Points2> part_group_points(const BodyModelTemplate& tmpl, const Points2& vertices2d,
                                       const std::vector<std::vector<int>>& groups) {
  std::vector<Points2> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    std::vector<Eigen::Index> idx;
    for (int v = 0; v < tmpl.vertex_count(); ++v) {
      if (std::find(g.begin(), g.end(), tmpl.part_of_vertex[static_cast<std::size_t>(v)]) != g.end()) idx.push_back(v);
    }
    Points2 pts(static_cast<Eigen::Index>(idx.size()), 2);
    for (std::size_t i = 0; i < idx.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = vertices2d.row(idx[i]);
    out.push_back(std::move(pts));
  }
  return out;
}

std::array<double, 3> part_color(int label, int part_count) {
  if (label >= part_count) return {0.25, 0.25, 0.25};
  const double h = std::fmod(label * 0.618033988749895, 1.0);
  // HSV(h, 0.7, 0.9) to RGB.
  const double v = 0.9, s = 0.7;
  const double h6 = h * 6.0;
  const int sector = static_cast<int>(h6) % 6;
  const double f = h6 - std::floor(h6);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (sector) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

SampleRecord make_sample(const BodyModelTemplate& tmpl, const BodyParams& params, const DatasetConfig& cfg) {
  const RenderedBody body = render_body(tmpl, params, cfg.width, cfg.height);
  SampleRecord s;
  s.params = params;
  s.keypoints3d = body.joints;
  s.keypoints2d = body.joints2d;
  s.part_seg = body.labels;
  s.part_count = tmpl.part_count;
  s.bbox_pad = cfg.bbox_pad;
  s.image = Image(cfg.height, cfg.width);
  for (int r = 0; r < cfg.height; ++r) {
    for (int c = 0; c < cfg.width; ++c) {
      const auto rgb = part_color(body.labels[static_cast<std::size_t>(r) * cfg.width + c], tmpl.part_count);
      for (int ch = 0; ch < 3; ++ch) s.image.at(r, c, ch) = rgb[static_cast<std::size_t>(ch)];
    }
  }
  s.part_groups = resolve_part_groups(tmpl, cfg);
  s.part_points2d = part_group_points(tmpl, body.vertices2d, s.part_groups);
  for (const auto& pts : s.part_points2d) {
    s.part_bboxes.push_back(derive_part_bbox(normalized_to_pixels(pts, cfg.width, cfg.height), cfg.bbox_pad));
  }
  return s;
}

namespace {

Vec3 uniform_in_ball(std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec3 d(normal(rng), normal(rng), normal(rng));
  const double n = d.norm();
  if (n == 0.0) return Vec3::Zero();
  return d / n * (radius * std::cbrt(unit(rng)));
}

}  // namespace

std::vector<SampleRecord> gen_dataset(const BodyModelTemplate& tmpl, const DatasetConfig& cfg) {
  if (cfg.n < 1) throw InvariantError("gen_dataset: n must be >= 1");
  std::vector<SampleRecord> out;
  out.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(i)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> shape_dist(0.0, 0.5);
    std::normal_distribution<double> expr_dist(0.0, 0.5);
    std::uniform_real_distribution<double> scale_dist(0.8, 1.2);
    std::uniform_real_distribution<double> trans_dist(-0.1, 0.1);

    BodyParams p = BodyParams::rest(tmpl, cfg.expression_dims);
    for (Eigen::Index k = 0; k < p.shape.size(); ++k) p.shape(k) = shape_dist(rng);
    p.global_orient = uniform_in_ball(rng, cfg.pose_scale);
    for (Eigen::Index j = 0; j < p.pose.rows(); ++j) p.pose.row(j) = uniform_in_ball(rng, cfg.pose_scale).transpose();
    for (Eigen::Index k = 0; k < p.expression.size(); ++k) p.expression(k) = expr_dist(rng);
    p.camera.s = scale_dist(rng);
    p.camera.t = Vec2(trans_dist(rng), trans_dist(rng));
    out.push_back(make_sample(tmpl, p, cfg));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loss assembly

std::string_view to_string(LossTerm term) {
  switch (term) {
    case LossTerm::l3d: return "3d";
    case LossTerm::l2d: return "2d";
    case LossTerm::bm: return "bm";
    case LossTerm::proj: return "proj";
    case LossTerm::segm: return "segm";
    case LossTerm::con: return "con";
    case LossTerm::box: return "box";
  }
  return "unknown";
}

TotalLoss total_loss(const LossComponents& components, const LossWeights& weights) {
  for (LossTerm t : kAllLossTerms) {
    if (!(weights[t] >= 0.0) || !std::isfinite(weights[t])) {
      throw InvariantError("total_loss: weight for '" + std::string(to_string(t)) + "' must be finite and >= 0");
    }
  }
  TotalLoss out;
  for (const auto& [term, value] : components) {
    if (!std::isfinite(value) || value < 0.0) {
      throw InvariantError("total_loss: component '" + std::string(to_string(term)) + "' must be finite and >= 0");
    }
    const double w = weights[term] * value;
    out.weighted[term] = w;
    out.total += w;
  }
  return out;
}

namespace {

LossTerm parse_loss_term(std::string key) {
  if (key.rfind("lambda_", 0) == 0) key = key.substr(7);
  if (key.rfind("L_", 0) == 0 || key.rfind("l_", 0) == 0) key = key.substr(2);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
  for (LossTerm t : kAllLossTerms) {
    if (to_string(t) == key) return t;
  }
  throw ParseError("unknown loss term '" + key + "'");
}

}  // namespace

LossWeights loss_weights_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("loss weights must be a JSON object");
  LossWeights w;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ParseError("loss weight '" + key + "' is not a number");
    w[parse_loss_term(key)] = value.get<double>();
  }
  return w;
}

LossComponents loss_components_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("loss components must be a JSON object");
  LossComponents c;
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number()) throw ParseError("loss component '" + key + "' is not a number");
    c[parse_loss_term(key)] = value.get<double>();
  }
  return c;
}

json to_json(const TotalLoss& loss) {
  json breakdown = json::object();
  for (const auto& [term, value] : loss.weighted) breakdown[std::string(to_string(term))] = value;
  return {{"total", loss.total}, {"breakdown", breakdown}};
}

// ---------------------------------------------------------------------------
// Estimators

BodyParams PassthroughEstimator::estimate(const SampleRecord& augmented, const SampleRecord&) const {
  return augmented.params;
}

BodyParams CropNaiveEstimator::estimate(const SampleRecord&, const SampleRecord& original) const {
  return original.params;
}

namespace {

class TempFile {
 public:
  TempFile() {
    std::string pattern = (std::filesystem::temp_directory_path() / "robomesh-XXXXXX").string();
    std::vector<char> buf(pattern.begin(), pattern.end());
    buf.push_back('\0');
    const int fd = ::mkstemp(buf.data());
    if (fd < 0) throw Error("ExecEstimator: cannot create temporary file");
    ::close(fd);
    path_ = buf.data();
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

BodyParams ExecEstimator::estimate(const SampleRecord& augmented, const SampleRecord& original) const {
  TempFile input;
  {
    std::ofstream f(input.path());
    f << estimator_input_json(augmented, 0).dump();
    if (!f) throw Error("ExecEstimator: cannot write sample");
  }
  const std::string cmd = command_ + " < '" + input.path() + "'";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw Error("ExecEstimator: cannot start '" + command_ + "'");
  std::string output;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  const int status = ::pclose(pipe);
  if (status != 0) throw Error("ExecEstimator: '" + command_ + "' exited with status " + std::to_string(status));
  BodyParams p;
  try {
    p = params_from_json(json::parse(output));
  } catch (const json::exception& e) {
    throw ParseError(std::string("ExecEstimator: bad output: ") + e.what());
  }
  if (p.pose.rows() != original.params.pose.rows() || p.shape.size() != original.params.shape.size()) {
    throw ShapeError("ExecEstimator: returned parameters have the wrong dimensions");
  }
  return p;
}

std::unique_ptr<Estimator> make_estimator(std::string_view spec) {
  if (spec == "passthrough") return std::make_unique<PassthroughEstimator>();
  if (spec == "crop-naive" || spec == "crop_naive") return std::make_unique<CropNaiveEstimator>();
  if (spec.rfind("exec:", 0) == 0 && spec.size() > 5) return std::make_unique<ExecEstimator>(std::string(spec.substr(5)));
  throw InvariantError("unknown estimator '" + std::string(spec) + "'");
}

// ---------------------------------------------------------------------------
// Sweep

std::string_view to_string(MetricKind metric) {
  switch (metric) {
    case MetricKind::mpjpe: return "mpjpe";
    case MetricKind::pa_mpjpe: return "pa_mpjpe";
    case MetricKind::pve: return "pve";
    case MetricKind::pa_pve: return "pa_pve";
    case MetricKind::pve2d: return "pve2d";
    case MetricKind::iou: return "iou";
    case MetricKind::f5: return "f5";
    case MetricKind::f15: return "f15";
  }
  return "unknown";
}

MetricKind parse_metric(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (MetricKind m : {MetricKind::mpjpe, MetricKind::pa_mpjpe, MetricKind::pve, MetricKind::pa_pve,
                       MetricKind::pve2d, MetricKind::iou, MetricKind::f5, MetricKind::f15}) {
    if (to_string(m) == lower) return m;
  }
  throw InvariantError("unknown metric '" + std::string(name) + "'");
}

bool is_error_metric(MetricKind metric) {
  return metric != MetricKind::iou && metric != MetricKind::f5 && metric != MetricKind::f15;
}

const ReportRow* MetricReport::find(std::string_view kind, double magnitude, std::string_view metric) const {
  for (const auto& r : rows) {
    if (r.kind == kind && r.metric == metric && std::abs(r.magnitude - magnitude) <= 1e-12) return &r;
  }
  return nullptr;
}

std::vector<double> evaluate_sample(const BodyModelTemplate& tmpl, const SampleRecord& truth,
                                    const BodyParams& estimate, const std::vector<MetricKind>& metrics) {
  const int w = truth.image.width;
  const int h = truth.image.height;
  const ForwardResult gt_fr = forward(tmpl, truth.params);
  const ForwardResult pr_fr = forward(tmpl, estimate);
  const Points3 gt_v = gt_fr.vertices.rowwise() - gt_fr.joints.row(0);
  const Points3 pr_v = pr_fr.vertices.rowwise() - pr_fr.joints.row(0);
  const Points3 gt_j = gt_fr.joints.rowwise() - gt_fr.joints.row(0);
  const Points3 pr_j = pr_fr.joints.rowwise() - pr_fr.joints.row(0);

  std::vector<double> out;
  out.reserve(metrics.size());
  for (MetricKind m : metrics) {
    switch (m) {
      case MetricKind::mpjpe: out.push_back(mpjpe(pr_j, gt_j, 0)); break;
      case MetricKind::pa_mpjpe: out.push_back(pa_mpjpe(pr_j, gt_j)); break;
      case MetricKind::pve: out.push_back(pve(pr_v, gt_v, Vec3::Zero(), Vec3::Zero())); break;
      case MetricKind::pa_pve: out.push_back(pa_pve(pr_v, gt_v)); break;
      case MetricKind::pve2d: {
        const Points2 a = normalized_to_pixels(project(pr_v, estimate.camera), w, h);
        const Points2 b = normalized_to_pixels(project(gt_v, truth.params.camera), w, h);
        out.push_back(projected_vertex_error(a, b));
        break;
      }
      case MetricKind::iou: {
        const std::vector<Points2> pts =
            part_group_points(tmpl, project(pr_v, estimate.camera), truth.part_groups);
        double sum = 0.0;
        for (std::size_t g = 0; g < pts.size(); ++g) {
          const Bbox pred = derive_part_bbox(normalized_to_pixels(pts[g], w, h), truth.bbox_pad);
          sum += bbox_iou(pred, truth.part_bboxes[g]);
        }
        out.push_back(pts.empty() ? 1.0 : sum / static_cast<double>(pts.size()));
        break;
      }
      case MetricKind::f5:
      case MetricKind::f15: {
        const double tau[] = {m == MetricKind::f5 ? 5.0 : 15.0};
        out.push_back(f_score(pr_v, gt_v, tau)[0]);
        break;
      }
    }
  }
  return out;
}

MetricReport run_sweep(const Estimator& estimator, const BodyModelTemplate& tmpl,
                       const std::vector<SampleRecord>& dataset,
                       const std::vector<std::vector<AugmentationSpec>>& grids,
                       const std::vector<MetricKind>& metrics, const SweepOptions& options) {
  if (dataset.empty()) throw InvariantError("run_sweep: empty dataset");
  if (grids.empty()) throw InvariantError("run_sweep: no grids");
  if (metrics.empty()) throw InvariantError("run_sweep: no metrics");

  std::vector<AugmentationSpec> cells;
  for (const auto& g : grids) cells.insert(cells.end(), g.begin(), g.end());

  struct CellResult {
    std::vector<double> sums;
    int ok = 0;
    int failed = 0;
  };
  std::vector<CellResult> results(cells.size());

  auto run_cell = [&](std::size_t c) {
    CellResult& res = results[c];
    res.sums.assign(metrics.size(), 0.0);
    for (const auto& sample : dataset) {
      try {
        const SampleRecord aug = apply_full(sample, cells[c]);
        const BodyParams est = estimator.estimate(aug, sample);
        const std::vector<double> vals = evaluate_sample(tmpl, aug, est, metrics);
        if (std::any_of(vals.begin(), vals.end(), [](double v) { return !std::isfinite(v); })) {
          throw Error("non-finite metric");
        }
        for (std::size_t m = 0; m < vals.size(); ++m) res.sums[m] += vals[m];
        ++res.ok;
      } catch (const std::exception&) {
        ++res.failed;
      }
    }
  };

  const int jobs = std::max(1, options.jobs);
  if (jobs == 1) {
    for (std::size_t c = 0; c < cells.size(); ++c) run_cell(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (int t = 0; t < jobs; ++t) {
      workers.emplace_back([&] {
        for (std::size_t c = next++; c < cells.size(); c = next++) run_cell(c);
      });
    }
    for (auto& t : workers) t.join();
  }

  MetricReport report;
  report.seed = options.seed;
  report.template_id = options.template_id;
  report.estimator_id = estimator.id();
  report.samples_per_cell = static_cast<int>(dataset.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    report.failures += results[c].failed;
    if (results[c].ok == 0) continue;
    for (std::size_t m = 0; m < metrics.size(); ++m) {
      report.rows.push_back({std::string(to_string(cells[c].kind)), cells[c].magnitude,
                             std::string(to_string(metrics[m])), results[c].sums[m] / results[c].ok, results[c].ok});
    }
  }
  return report;
}

ReportFormat report_format_for(const std::filesystem::path& path) {
  return path.extension() == ".json" ? ReportFormat::json : ReportFormat::csv;
}

std::string report_to_csv(const MetricReport& report) {
  std::string out = "kind,magnitude,metric,value,n\n";
  char buf[64];
  for (const auto& r : report.rows) {
    out += r.kind;
    std::snprintf(buf, sizeof buf, ",%.6g,", r.magnitude);
    out += buf;
    out += r.metric;
    std::snprintf(buf, sizeof buf, ",%.6g,%d\n", r.value, r.n);
    out += buf;
  }
  return out;
}

json report_to_json(const MetricReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"kind", r.kind}, {"magnitude", r.magnitude}, {"metric", r.metric}, {"value", r.value}, {"n", r.n}});
  }
  return {{"metadata",
           {{"seed", report.seed},
            {"template_id", report.template_id},
            {"estimator_id", report.estimator_id},
            {"samples_per_cell", report.samples_per_cell},
            {"failures", report.failures}}},
          {"rows", rows}};
}

MetricReport report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "kind,magnitude,metric,value,n") {
    throw ParseError("report CSV: missing header 'kind,magnitude,metric,value,n'");
  }
  MetricReport report;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 5) throw ParseError("report CSV line " + std::to_string(lineno) + ": expected 5 columns");
    try {
      report.rows.push_back({cols[0], std::stod(cols[1]), cols[2], std::stod(cols[3]), std::stoi(cols[4])});
    } catch (const std::exception&) {
      throw ParseError("report CSV line " + std::to_string(lineno) + ": bad number");
    }
  }
  return report;
}

MetricReport report_from_json(const json& j) {
  try {
    MetricReport report;
    const json& meta = j.at("metadata");
    report.seed = meta.at("seed").get<std::uint64_t>();
    report.template_id = meta.at("template_id").get<std::string>();
    report.estimator_id = meta.at("estimator_id").get<std::string>();
    report.samples_per_cell = meta.value("samples_per_cell", 0);
    report.failures = meta.value("failures", 0);
    for (const json& r : j.at("rows")) {
      report.rows.push_back({r.at("kind").get<std::string>(), r.at("magnitude").get<double>(),
                             r.at("metric").get<std::string>(), r.at("value").get<double>(), r.at("n").get<int>()});
    }
    return report;
  } catch (const json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what());
  }
}

void emit_report(const MetricReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("emit_report: cannot open " + path.string());
  if (format == ReportFormat::csv) {
    out << report_to_csv(report);
  } else {
    out << report_to_json(report).dump(2) << '\n';
  }
  if (!out) throw Error("emit_report: write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json points_json(const auto& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

template <typename M>
M points_from_json(const json& j) {
  M m(static_cast<Eigen::Index>(j.size()), M::ColsAtCompileTime);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != static_cast<std::size_t>(M::ColsAtCompileTime)) throw ParseError("point row has wrong length");
    for (Eigen::Index c = 0; c < M::ColsAtCompileTime; ++c) {
      m(static_cast<Eigen::Index>(r), c) = j[r][static_cast<std::size_t>(c)].get<double>();
    }
  }
  return m;
}

json vec_json(const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VecX vec_from_json(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json to_json(const BodyParams& p) {
  return {{"global_orient", {p.global_orient.x(), p.global_orient.y(), p.global_orient.z()}},
          {"pose", points_json(p.pose)},
          {"shape", vec_json(p.shape)},
          {"expression", vec_json(p.expression)},
          {"camera", {{"s", p.camera.s}, {"t", {p.camera.t.x(), p.camera.t.y()}}}}};
}

BodyParams params_from_json(const json& j) {
  try {
    BodyParams p;
    const auto go = j.at("global_orient").get<std::vector<double>>();
    if (go.size() != 3) throw ParseError("params: global_orient must have 3 entries");
    p.global_orient = Vec3(go[0], go[1], go[2]);
    p.pose = points_from_json<Points3>(j.at("pose"));
    p.shape = vec_from_json(j.at("shape"));
    p.expression = j.contains("expression") ? vec_from_json(j.at("expression")) : VecX();
    const json& cam = j.at("camera");
    p.camera.s = cam.at("s").get<double>();
    const auto t = cam.at("t").get<std::vector<double>>();
    if (t.size() != 2) throw ParseError("params: camera.t must have 2 entries");
    p.camera.t = Vec2(t[0], t[1]);
    if (!(p.camera.s > 0.0)) throw InvariantError("params: camera scale must be positive");
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("params JSON: ") + e.what());
  }
}

json to_json(const SampleRecord& s) {
  json boxes = json::array();
  for (const auto& b : s.part_bboxes) boxes.push_back({b.center.x(), b.center.y(), b.w, b.h});
  json pts = json::array();
  for (const auto& p : s.part_points2d) pts.push_back(points_json(p));
  json prov = json::array();
  for (const auto& a : s.provenance) prov.push_back(to_json(a));
  return {{"image", {{"height", s.image.height}, {"width", s.image.width}, {"data", s.image.data}}},
          {"params", to_json(s.params)},
          {"keypoints2d", points_json(s.keypoints2d)},
          {"keypoints3d", points_json(s.keypoints3d)},
          {"part_seg", s.part_seg},
          {"part_count", s.part_count},
          {"part_groups", s.part_groups},
          {"part_points2d", pts},
          {"part_bboxes", boxes},
          {"bbox_pad", s.bbox_pad},
          {"provenance", prov}};
}

SampleRecord sample_from_json(const json& j) {
  try {
    SampleRecord s;
    const json& img = j.at("image");
    s.image.height = img.at("height").get<int>();
    s.image.width = img.at("width").get<int>();
    s.image.data = img.at("data").get<std::vector<double>>();
    if (s.image.data.size() != static_cast<std::size_t>(s.image.height) * s.image.width * 3) {
      throw ParseError("sample: image data does not match its dimensions");
    }
    s.params = params_from_json(j.at("params"));
    s.keypoints2d = points_from_json<Points2>(j.at("keypoints2d"));
    s.keypoints3d = points_from_json<Points3>(j.at("keypoints3d"));
    s.part_seg = j.at("part_seg").get<std::vector<int>>();
    s.part_count = j.at("part_count").get<int>();
    s.part_groups = j.at("part_groups").get<std::vector<std::vector<int>>>();
    for (const json& p : j.at("part_points2d")) s.part_points2d.push_back(points_from_json<Points2>(p));
    for (const json& b : j.at("part_bboxes")) {
      const auto v = b.get<std::vector<double>>();
      if (v.size() != 4) throw ParseError("sample: bbox must be [cx, cy, w, h]");
      s.part_bboxes.push_back({Vec2(v[0], v[1]), v[2], v[3]});
    }
    s.bbox_pad = j.at("bbox_pad").get<double>();
    for (const json& a : j.at("provenance")) {
      s.provenance.push_back({parse_augmentation_kind(a.at("kind").get<std::string>()), a.at("magnitude").get<double>()});
    }
    if (s.part_points2d.size() != s.part_groups.size() || s.part_bboxes.size() != s.part_groups.size()) {
      throw ParseError("sample: part groups, points and boxes disagree in count");
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("sample JSON: ") + e.what());
  }
}

json estimator_input_json(const SampleRecord& s, std::size_t index) {
  return {{"index", index}, {"height", s.image.height}, {"width", s.image.width}, {"image", s.image.data}};
}

void save_dataset(const std::filesystem::path& dir, const BodyModelTemplate& tmpl,
                  const std::vector<SampleRecord>& samples, const DatasetConfig& cfg) {
  std::filesystem::create_directories(dir);
  save_template(tmpl, dir / "template.rbmx");
  json samples_json = json::array();
  for (const auto& s : samples) samples_json.push_back(to_json(s));
  const json doc = {{"config",
                     {{"n", cfg.n},
                      {"seed", cfg.seed},
                      {"pose_scale", cfg.pose_scale},
                      {"width", cfg.width},
                      {"height", cfg.height},
                      {"expression_dims", cfg.expression_dims},
                      {"bbox_pad", cfg.bbox_pad},
                      {"part_groups", cfg.part_groups}}},
                    {"samples", samples_json}};
  std::ofstream out(dir / "dataset.json");
  if (!out) throw Error("save_dataset: cannot write " + (dir / "dataset.json").string());
  out << doc.dump();
}

LoadedDataset load_dataset(const std::filesystem::path& dir) {
  LoadedDataset ds;
  ds.tmpl = load_template(dir / "template.rbmx");
  std::ifstream in(dir / "dataset.json");
  if (!in) throw ParseError("load_dataset: cannot open " + (dir / "dataset.json").string());
  json doc;
  try {
    doc = json::parse(in);
    const json& c = doc.at("config");
    ds.config.n = c.at("n").get<int>();
    ds.config.seed = c.at("seed").get<std::uint64_t>();
    ds.config.pose_scale = c.at("pose_scale").get<double>();
    ds.config.width = c.at("width").get<int>();
    ds.config.height = c.at("height").get<int>();
    ds.config.expression_dims = c.at("expression_dims").get<int>();
    ds.config.bbox_pad = c.at("bbox_pad").get<double>();
    ds.config.part_groups = c.at("part_groups").get<std::vector<std::vector<int>>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("dataset.json: ") + e.what());
  }
  for (const json& s : doc.at("samples")) ds.samples.push_back(sample_from_json(s));
  return ds;
}

}  // namespace robomesh
