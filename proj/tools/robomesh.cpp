// robomesh command line: dataset generation, robustness sweeps, loss assembly.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "robomesh/augmentation.hpp"
#include "robomesh/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitEstimator = 3;

// Config problems get their own exit code.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

robomesh::BodyModelTemplate resolve_template(const std::string& spec) {
  if (spec == "synthetic") return robomesh::make_synthetic_template();
  try {
    return robomesh::load_template(spec);
  } catch (const robomesh::Error& e) {
    throw ConfigError(std::string("template: ") + e.what());
  }
}

struct GenArgs {
  std::string tmpl = "synthetic";
  int n = 20;
  std::uint64_t seed = 0;
  double pose_scale = 0.4;
  int size = 64;
  double pad = 0.2;
  std::string out;
};

int run_gen(const GenArgs& a) {
  if (a.n < 1) throw ConfigError("--n must be >= 1");
  if (a.size < 8) throw ConfigError("--size must be >= 8");
  robomesh::DatasetConfig cfg;
  cfg.n = a.n;
  cfg.seed = a.seed;
  cfg.pose_scale = a.pose_scale;
  cfg.width = cfg.height = a.size;
  cfg.bbox_pad = a.pad;
  const auto tmpl = resolve_template(a.tmpl);
  const auto samples = robomesh::gen_dataset(tmpl, cfg);
  robomesh::save_dataset(a.out, tmpl, samples, cfg);
  std::printf("wrote %d samples to %s\n", a.n, a.out.c_str());
  return kExitOk;
}

struct SweepArgs {
  std::string dataset;
  std::string estimator = "passthrough";
  std::string kinds = "all";
  int steps = 7;
  std::string metrics = "mpjpe,pa_mpjpe,pve,pa_pve,pve2d,iou";
  std::string out = "report.csv";
  int jobs = 1;
  double max_failure_rate = 0.0;
};

int run_sweep_cmd(const SweepArgs& a) {
  using namespace robomesh;
  if (a.steps < 2) throw ConfigError("--steps must be >= 2");
  if (a.jobs < 1) throw ConfigError("--jobs must be >= 1");

  std::vector<AugmentationKind> kinds;
  try {
    if (a.kinds == "all") {
      kinds.assign(kAllAugmentationKinds.begin(), kAllAugmentationKinds.end());
    } else {
      for (const auto& k : split_list(a.kinds)) kinds.push_back(parse_augmentation_kind(k));
    }
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  std::vector<MetricKind> metrics;
  try {
    for (const auto& m : split_list(a.metrics)) metrics.push_back(parse_metric(m));
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (kinds.empty() || metrics.empty()) throw ConfigError("--kinds and --metrics must not be empty");

  std::unique_ptr<Estimator> estimator;
  try {
    estimator = make_estimator(a.estimator);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }

  LoadedDataset ds;
  try {
    ds = load_dataset(a.dataset);
  } catch (const Error& e) {
    throw ConfigError(std::string("dataset: ") + e.what());
  }

  std::vector<std::vector<AugmentationSpec>> grids;
  for (auto k : kinds) grids.push_back(sweep_grid(k, a.steps));

  SweepOptions opts;
  opts.jobs = a.jobs;
  opts.seed = ds.config.seed;
  opts.template_id = "rbmx:V" + std::to_string(ds.tmpl.vertex_count()) + ":J" + std::to_string(ds.tmpl.joint_count());
  const MetricReport report = robomesh::run_sweep(*estimator, ds.tmpl, ds.samples, grids, metrics, opts);
  emit_report(report, report_format_for(a.out), a.out);

  std::size_t cells = 0;
  for (const auto& g : grids) cells += g.size();
  const double attempts = static_cast<double>(cells * ds.samples.size());
  const double rate = report.failures / attempts;
  std::printf("%zu rows, %d/%.0f estimator failures, wrote %s\n", report.rows.size(), report.failures, attempts,
              a.out.c_str());
  if (rate > a.max_failure_rate) {
    std::fprintf(stderr, "estimator failure rate %.4g exceeds --max-failure-rate %.4g\n", rate, a.max_failure_rate);
    return kExitEstimator;
  }
  return kExitOk;
}

int run_losses(const std::string& config, const std::string& inputs) {
  robomesh::LossWeights w;
  robomesh::LossComponents c;
  try {
    if (!config.empty()) w = robomesh::loss_weights_from_json(read_json_file(config));
    c = robomesh::loss_components_from_json(read_json_file(inputs));
  } catch (const robomesh::ParseError& e) {
    throw ConfigError(e.what());
  }
  const auto total = robomesh::total_loss(c, w);
  std::cout << robomesh::to_json(total).dump(2) << '\n';
  return kExitOk;
}

int run_template(const std::string& out, int shape_count, std::uint64_t seed) {
  robomesh::SyntheticTemplateOptions opts;
  opts.shape_count = shape_count;
  opts.seed = seed;
  const auto tmpl = robomesh::make_synthetic_template(opts);
  if (out.ends_with(".json")) {
    std::ofstream f(out);
    if (!f) throw robomesh::Error("cannot write " + out);
    f << robomesh::template_to_json(tmpl);
  } else {
    robomesh::save_template(tmpl, out);
  }
  std::printf("template V=%d F=%d J=%d P=%d -> %s\n", tmpl.vertex_count(), tmpl.face_count(), tmpl.joint_count(),
              tmpl.part_count, out.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robomesh: robustness sweeps for whole-body mesh estimators"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a synthetic dataset");
  gen_cmd->add_option("--template", gen.tmpl, "Template file (.rbmx or .json) or 'synthetic'");
  gen_cmd->add_option("--n", gen.n, "Number of samples");
  gen_cmd->add_option("--seed", gen.seed, "RNG seed");
  gen_cmd->add_option("--pose-scale", gen.pose_scale, "Bound on each joint's axis-angle norm (rad)");
  gen_cmd->add_option("--size", gen.size, "Crop side length in pixels");
  gen_cmd->add_option("--pad", gen.pad, "Part bbox padding fraction");
  gen_cmd->add_option("--out", gen.out, "Output directory")->required();

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an augmentation robustness sweep");
  sweep_cmd->add_option("--dataset", sweep.dataset, "Directory written by 'gen'")->required();
  sweep_cmd->add_option("--estimator", sweep.estimator, "passthrough | crop-naive | exec:CMD");
  sweep_cmd->add_option("--kinds", sweep.kinds, "Comma-separated augmentation kinds, or 'all'");
  sweep_cmd->add_option("--steps", sweep.steps, "Magnitudes per kind");
  sweep_cmd->add_option("--metrics", sweep.metrics, "Comma-separated metrics");
  sweep_cmd->add_option("--out", sweep.out, "Report path (.csv or .json)");
  sweep_cmd->add_option("--jobs", sweep.jobs, "Worker threads");
  sweep_cmd->add_option("--max-failure-rate", sweep.max_failure_rate, "Tolerated fraction of failed estimates");

  std::string loss_config, loss_inputs;
  auto* loss_cmd = app.add_subcommand("losses", "Combine per-term losses with weights");
  loss_cmd->add_option("--config", loss_config, "Weights JSON (defaults to all 1)");
  loss_cmd->add_option("--inputs", loss_inputs, "Per-term loss values JSON")->required();

  std::string tmpl_out;
  int tmpl_shapes = 4;
  std::uint64_t tmpl_seed = 7;
  auto* tmpl_cmd = app.add_subcommand("template", "Write the built-in synthetic template");
  tmpl_cmd->add_option("--out", tmpl_out, "Output path (.rbmx binary or .json)")->required();
  tmpl_cmd->add_option("--shapes", tmpl_shapes, "Shape blendshape count");
  tmpl_cmd->add_option("--seed", tmpl_seed, "Seed for the random blendshapes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*sweep_cmd) return run_sweep_cmd(sweep);
    if (*loss_cmd) return run_losses(loss_config, loss_inputs);
    if (*tmpl_cmd) return run_template(tmpl_out, tmpl_shapes, tmpl_seed);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const robomesh::InvariantError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
