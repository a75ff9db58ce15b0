#ifndef JPSA_HARNESS_HPP
#define JPSA_HARNESS_HPP

#include "jpsa/classify_metrics.hpp"
#include "jpsa/config.hpp"
#include "jpsa/data_model.hpp"
#include "jpsa/jpsa.hpp"
#include "jpsa/superpixel.hpp"
#include "jpsa/synthetic.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace jpsa {

/// A pipeline failure tagged with the stage it happened in.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& cause)
      : std::runtime_error("[" + stage + "] " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// Runs fn, rethrowing any std::exception as StageError(stage, what()).
template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

enum class Method { raw, pca, lpp, jpsa };

Method parse_method(const std::string& name);
const char* to_string(Method m);

/// Fully resolved experiment settings. Built from a ConfigMap (after any
/// named preset has been expanded); `settings` keeps that flat map so grid
/// cells and sweeps can override arbitrary keys.
struct ExperimentConfig {
  ConfigMap settings;

  Method method = Method::jpsa;
  std::uint64_t seed = 7;
  std::filesystem::path output_dir = "out";

  // Dataset: files when header is set, otherwise synthetic.
  std::optional<std::filesystem::path> header_path;
  std::optional<std::filesystem::path> payload_path;
  std::optional<std::filesystem::path> labels_path;
  SyntheticSpec synthetic;

  int train_per_class = 20;
  bool include_unlabeled = false;
  int max_unlabeled = 400;

  HyperParams hp;
  AdmmConfig admm;
  double slic_compactness = 10.0;
  int slic_max_iters = 10;

  std::map<std::string, std::vector<std::string>> grid;  // config key -> candidates
  int grid_budget = 0;                                   // 0 = no cap
  int cv_folds = 10;
  int threads = 0;  // 0 = hardware concurrency

  static ExperimentConfig from_map(const ConfigMap& map);
  static ExperimentConfig from_text(std::string_view text) { return from_map(ConfigMap::parse(text)); }

  // Copy with `key` set to `value` in the underlying settings, re-resolved.
  ExperimentConfig with(const std::string& key, const std::string& value) const;

  // Resolved key=value listing of every setting that drives a run.
  std::string echo() const;

  int final_dim() const { return hp.dims.back(); }
};

// Named settings: "indian_pines" (alpha=1, beta=0.1, gamma=0.1, d=20) and
// "houston" (same weights, d=30). Throws InputError for unknown names.
ConfigMap preset(const std::string& name);

// Default search space: d and k in {10..50 step 10}; sigma, alpha, beta and
// gamma in {1e-2 .. 1e2}.
std::map<std::string, std::vector<std::string>> default_grid();

struct Dataset {
  Matrix cube;  // bands x pixels, scaled so the largest column norm is 1
  int width = 0;
  int height = 0;
  std::vector<int> labels;  // 0 = unlabeled
  int n_classes = 0;
  double scale = 1.0;  // raw = cube * scale

  std::size_t pixels() const { return labels.size(); }
};

Dataset load_dataset(const ExperimentConfig& cfg);

/// Up to train_per_class pixels of each class (at least one per class is
/// left for testing when the class has two or more pixels), the remaining
/// labeled pixels as test set, label-0 pixels as unlabeled. Seeded shuffle.
SampleSplit make_split(std::span<const int> labels, int n_classes, int train_per_class, std::uint64_t seed);

/// Segmentation and superpixel stream of a whole scene.
struct Streams {
  Segmentation seg;
  Matrix stream;
};

Streams compute_streams(const Dataset& data, const ExperimentConfig& cfg);

struct FittedModel {
  ProjectionStack stack;
  std::optional<FitReport> report;  // jpsa only
};

/// Learns the projection for `method` from the training pixels. Streams are
/// needed for jpsa only.
FittedModel fit_method(const Dataset& data, const Streams* streams, std::span<const std::size_t> train,
                       std::span<const std::size_t> unlabeled, const ExperimentConfig& cfg);

// NN accuracy of the model on `test` with `train` as the reference set.
MetricsReport evaluate_model(const Dataset& data, const ProjectionStack& stack, std::span<const std::size_t> train,
                             std::span<const std::size_t> test);

struct ExperimentResult {
  MetricsReport metrics;
  FittedModel model;
  SampleSplit split;
  std::vector<int> prediction_map;  // predicted class for every pixel
  std::vector<std::filesystem::path> files;
};

/// load -> split -> segment/streams -> fit -> transform -> NN -> metrics.
/// Writes config.txt, metrics.csv, convergence.csv, model.bin,
/// prediction_map.ppm and truth_map.ppm (plus init_layer<l>.csv traces for
/// jpsa) into cfg.output_dir when write_outputs is set.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_outputs = true);

struct GridCell {
  int id = 0;
  std::map<std::string, std::string> values;
  std::vector<double> fold_oa;
  double mean_oa = 0;
  std::string error;  // non-empty when the cell failed
};

struct GridResult {
  std::vector<GridCell> cells;  // evaluated cells in enumeration order
  int best_index = -1;          // into cells
  ExperimentConfig best_config;

  const GridCell& best() const { return cells.at(static_cast<std::size_t>(best_index)); }
  std::string to_csv() const;
};

/// Cells enumerate the product of cfg.grid with keys in sorted order and the
/// last key varying fastest. With a budget below the product size, an evenly
/// strided subset of cell ids is evaluated. Each cell's score is the mean OA
/// of stratified cv_folds-fold cross-validation on the training split. The
/// highest mean wins; ties keep the earliest cell.
GridResult grid_search_cv(const ExperimentConfig& cfg);

struct SweepRow {
  int m = 0;
  MetricsReport metrics;
};

/// Runs the jpsa pipeline for each layer count with every layer at the
/// configured final dimension.
std::vector<SweepRow> layer_sweep(const ExperimentConfig& cfg, const std::vector<int>& m_list);
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace jpsa

#endif  // JPSA_HARNESS_HPP
