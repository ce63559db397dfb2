#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "robomesh/augmentation.hpp"
#include "robomesh/body_model.hpp"
#include "robomesh/sample.hpp"

namespace robomesh {

// ---------------------------------------------------------------------------
// Synthetic data

struct DatasetConfig {
  int n = 20;
  std::uint64_t seed = 0;
  double pose_scale = 0.4;  // radians, bound on every joint's axis-angle norm
  int width = 64;
  int height = 64;
  int expression_dims = 10;
  double bbox_pad = 0.2;
  /// Part labels per box group; empty means one group per leaf joint's part.
  std::vector<std::vector<int>> part_groups;
};

/// Everything derived from a parameter set: posed mesh (root-relative),
/// projections, and the rendered label map.
struct RenderedBody {
  Points3 vertices;   // root-relative
  Points3 joints;     // root-relative
  Points2 vertices2d; // normalized crop frame
  Points2 joints2d;
  std::vector<int> labels;
};

RenderedBody render_body(const BodyModelTemplate& tmpl, const BodyParams& params, int width, int height);

/// Groups used for part boxes, resolved against the template.
std::vector<std::vector<int>> resolve_part_groups(const BodyModelTemplate& tmpl, const DatasetConfig& cfg);

/// Projected vertices of each part group (normalized crop frame).
std::vector<Points2> part_group_points(const BodyModelTemplate& tmpl, const Points2& vertices2d,
                                       const std::vector<std::vector<int>>& groups);

/// Fixed per-part palette; background is the last entry.
std::array<double, 3> part_color(int label, int part_count);

/// Builds one sample from explicit parameters.
SampleRecord make_sample(const BodyModelTemplate& tmpl, const BodyParams& params, const DatasetConfig& cfg);

/// n random samples: shape ~ N(0, 0.5^2), every axis-angle uniform in the ball of
/// radius pose_scale, camera scale in [0.8, 1.2], translation in [-0.1, 0.1]^2.
/// Each sample draws from its own stream seeded by (seed, index).
std::vector<SampleRecord> gen_dataset(const BodyModelTemplate& tmpl, const DatasetConfig& cfg);

// ---------------------------------------------------------------------------
// Loss assembly

enum class LossTerm { l3d, l2d, bm, proj, segm, con, box };
inline constexpr std::array<LossTerm, 7> kAllLossTerms = {LossTerm::l3d, LossTerm::l2d,  LossTerm::bm,
                                                          LossTerm::proj, LossTerm::segm, LossTerm::con,
                                                          LossTerm::box};
std::string_view to_string(LossTerm term);

/// Weight per term, all 1 by default. box applies to whole-body training only;
/// leaving its component out of the input omits it.
struct LossWeights {
  std::array<double, 7> lambda = {1, 1, 1, 1, 1, 1, 1};
  double& operator[](LossTerm t) { return lambda[static_cast<std::size_t>(t)]; }
  double operator[](LossTerm t) const { return lambda[static_cast<std::size_t>(t)]; }
};

using LossComponents = std::map<LossTerm, double>;

struct TotalLoss {
  double total = 0.0;
  std::map<LossTerm, double> weighted;
};

TotalLoss total_loss(const LossComponents& components, const LossWeights& weights);

/// {"3d": .., "2d": .., "bm": .., "proj": .., "segm": .., "con": .., "box": ..};
/// "lambda_" prefixes are accepted. Unknown keys throw ParseError.
LossWeights loss_weights_from_json(const nlohmann::json& j);
LossComponents loss_components_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TotalLoss& loss);

// ---------------------------------------------------------------------------
// Estimators

class Estimator {
 public:
  virtual ~Estimator() = default;
  virtual std::string id() const = 0;
  /// `augmented` is the crop the estimator sees; `original` is its pre-augmentation source.
  /// Throws on failure.
  virtual BodyParams estimate(const SampleRecord& augmented, const SampleRecord& original) const = 0;
};

/// Returns the co-updated ground truth.
class PassthroughEstimator final : public Estimator {
 public:
  std::string id() const override { return "passthrough"; }
  BodyParams estimate(const SampleRecord& augmented, const SampleRecord& original) const override;
};

/// Returns the original ground truth, ignoring whatever the augmentation did.
class CropNaiveEstimator final : public Estimator {
 public:
  std::string id() const override { return "crop-naive"; }
  BodyParams estimate(const SampleRecord& augmented, const SampleRecord& original) const override;
};

/// Runs `command` once per sample: the sample JSON (image grid, no ground
/// truth) arrives on stdin, a BodyParams JSON object is read from stdout.
class ExecEstimator final : public Estimator {
 public:
  explicit ExecEstimator(std::string command) : command_(std::move(command)) {}
  std::string id() const override { return "exec:" + command_; }
  BodyParams estimate(const SampleRecord& augmented, const SampleRecord& original) const override;

 private:
  std::string command_;
};

/// "passthrough", "crop-naive" or "exec:CMD".
std::unique_ptr<Estimator> make_estimator(std::string_view spec);

// ---------------------------------------------------------------------------
// Sweep

enum class MetricKind { mpjpe, pa_mpjpe, pve, pa_pve, pve2d, iou, f5, f15 };
std::string_view to_string(MetricKind metric);
/// Case-insensitive.
MetricKind parse_metric(std::string_view name);
/// Error metrics are zero for a perfect estimate; iou and the F-scores are one.
bool is_error_metric(MetricKind metric);

struct ReportRow {
  std::string kind;
  double magnitude = 0.0;
  std::string metric;
  double value = 0.0;
  int n = 0;

  bool operator==(const ReportRow&) const = default;
};

struct MetricReport {
  std::vector<ReportRow> rows;
  std::uint64_t seed = 0;
  std::string template_id;
  std::string estimator_id;
  int samples_per_cell = 0;
  int failures = 0;

  const ReportRow* find(std::string_view kind, double magnitude, std::string_view metric) const;
};

struct SweepOptions {
  int jobs = 1;
  std::uint64_t seed = 0;
  std::string template_id = "synthetic";
};

/// Runs every grid cell over the dataset. Failed samples are skipped and
/// counted; a cell with no successful sample emits no rows.
MetricReport run_sweep(const Estimator& estimator, const BodyModelTemplate& tmpl,
                       const std::vector<SampleRecord>& dataset,
                       const std::vector<std::vector<AugmentationSpec>>& grids,
                       const std::vector<MetricKind>& metrics, const SweepOptions& options = {});

/// Metric values of one estimate against the sample's (already co-updated) ground truth.
std::vector<double> evaluate_sample(const BodyModelTemplate& tmpl, const SampleRecord& truth,
                                    const BodyParams& estimate, const std::vector<MetricKind>& metrics);

enum class ReportFormat { csv, json };
/// Chosen from the file extension; anything but ".json" is CSV.
ReportFormat report_format_for(const std::filesystem::path& path);

/// CSV header "kind,magnitude,metric,value,n", values with 6 significant digits.
std::string report_to_csv(const MetricReport& report);
nlohmann::json report_to_json(const MetricReport& report);
MetricReport report_from_csv(const std::string& text);
MetricReport report_from_json(const nlohmann::json& j);
void emit_report(const MetricReport& report, ReportFormat format, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json to_json(const BodyParams& params);
BodyParams params_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SampleRecord& sample);
SampleRecord sample_from_json(const nlohmann::json& j);
/// What an external estimator receives: the image grid and its size.
nlohmann::json estimator_input_json(const SampleRecord& sample, std::size_t index);

/// DIR/template.rbmx plus DIR/dataset.json.
void save_dataset(const std::filesystem::path& dir, const BodyModelTemplate& tmpl,
                  const std::vector<SampleRecord>& samples, const DatasetConfig& cfg);
struct LoadedDataset {
  BodyModelTemplate tmpl;
  std::vector<SampleRecord> samples;
  DatasetConfig config;
};
LoadedDataset load_dataset(const std::filesystem::path& dir);

}  // namespace robomesh
