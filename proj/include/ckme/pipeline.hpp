#pragma once

#include "ckme/classifier.hpp"
#include "ckme/core_data.hpp"
#include "ckme/herding.hpp"
#include "ckme/preprocess.hpp"
#include "ckme/rff.hpp"
#include "ckme/synth.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ckme {

/// How a (sub-selected) set becomes a feature vector for the linear model.
enum class Representation { ckme, naive_mean };

std::string_view to_string(Representation r) noexcept;
Representation parse_representation(std::string_view text);

struct PipelineConfig {
  double gamma = 1.0;
  Eigen::Index D = 2000;
  /// Cells kept per set; 0 keeps all of them.
  Eigen::Index m = 200;
  int folds = 5;
  int runs = 5;
  double reg_c = 1.0;
  std::uint64_t seed = 0;
  SubsampleMethod subsample = SubsampleMethod::herding;
  Preprocessing preprocessing;
  int clusters = 10;
  Representation representation = Representation::ckme;
  double tol = 1e-6;
  long max_iter = 100000;
  int kmeans_max_iter = 300;
  std::size_t herd_cache_mb = 1024;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Apply one key=value pair; throws ConfigError on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  /// Effective settings in a fixed key order.
  std::vector<std::pair<std::string, std::string>> entries() const;

  SolverOptions solver() const { return {tol, max_iter}; }
};

/// Read a key=value file (# comments, blank lines ignored) into cfg.
void apply_config_file(PipelineConfig& cfg, const std::string& path);

/// The frequency map used by run `run` of an experiment seeded with `seed`.
RffMap run_map(Eigen::Index d, const PipelineConfig& cfg, int run);

/// Row indices kept by cfg's sub-selection (herding order, uniform draw, or
/// 0..n-1 when m is 0 or at least n). `seed` only matters for uniform.
std::vector<Eigen::Index> select_indices(const RffMap& map, const SampleSet& set, const PipelineConfig& cfg,
                                         std::uint64_t seed);

/// Sub-select a set according to cfg (herding, uniform, or all cells).
SampleSet select_cells(const RffMap& map, const SampleSet& set, const PipelineConfig& cfg,
                       std::uint64_t seed);

/// Feature vector of an already sub-selected set.
Vector represent(const RffMap& map, const SampleSet& set, Representation representation);

/// Fold id per sample; each class is shuffled then dealt round-robin.
/// Throws ConfigError if folds > N, DataError if a training partition would
/// miss a class.
std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed);

struct CvReport {
  /// accuracy[run][fold]
  std::vector<std::vector<double>> fold_accuracy;
  std::vector<double> run_accuracy;
  double mean = 0.0;
  /// Sample standard deviation of run-level accuracies (0 for one run).
  double stddev = 0.0;
  PipelineConfig config;
};

/// Repeated stratified K-fold CV. Each run draws its own frequency map and
/// split; within a fold: fit preprocessing on train, sub-select, embed, train,
/// score held-out sets.
CvReport cross_validate(const LabeledDataset& data, const PipelineConfig& cfg);

/// Train on the whole dataset with run 0's map.
LinearModel train_pipeline(const LabeledDataset& data, const PipelineConfig& cfg);

/// A raw set after the model's preprocessing and sub-selection.
struct PreparedSet {
  SampleSet cells;
  /// Row of each kept cell in the raw set.
  std::vector<Eigen::Index> rows;
};

PreparedSet prepare_for_model(const LinearModel& model, const SampleSet& set);

/// Decision value for one raw (unpreprocessed) set under a trained model.
double predict_set(const LinearModel& model, const SampleSet& set);

struct HerdBenchRow {
  SubsampleMethod method;
  Eigen::Index m;
  /// |mu(subset) - mu(full set)| averaged over seeds.
  double error;
};

/// Embedding error of herding and uniform sub-sampling as a function of m.
/// Each seed draws one set of `n` cells from the mixture and a fresh
/// frequency map (cfg.D, cfg.gamma). Herding runs once to max(ms); smaller
/// m reuse its prefix.
std::vector<HerdBenchRow> herd_bench(const std::vector<MixtureComponent>& mixture, int n,
                                     const std::vector<Eigen::Index>& ms, int seeds, const PipelineConfig& cfg);

/// Held-out accuracies of the three cluster-frequency predictors.
struct FrequencyCvReport {
  std::vector<double> linear;    ///< learned alpha over frequencies, per run
  std::vector<double> centroid;  ///< fixed s(nu_c), per run
  std::vector<double> average;   ///< fixed s(G_c), per run
  std::vector<double> ckme;      ///< the embedding model itself, per run
};

/// CV in which each fold also clusters the pooled sub-selected training cells
/// and evaluates frequency-based predictors on the held-out sets.
FrequencyCvReport frequency_predictors_cv(const LabeledDataset& data, const PipelineConfig& cfg);

double mean_of(const std::vector<double>& v);

}  // namespace ckme
