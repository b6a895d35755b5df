#pragma once

#include "ckme/core_data.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ckme {

/// One diagonal-covariance Gaussian component of a class mixture.
struct MixtureComponent {
  Vector mean;
  Vector variance;
  double weight = 0.0;
};

/// Two-class Gaussian-mixture benchmark description.
///
/// Text form (key=value, repeated `component.<label>` lines):
///   dim=2
///   sets_per_class=40
///   cells_per_set=1000
///   seed=7
///   component.pos=0,0|1,1|0.3      # mean | diagonal variance | weight
///   component.pos=4,0|1,1|0.7
///   component.neg=0,0|1,1|0.7
///   component.neg=4,0|1,1|0.3
struct SyntheticSpec {
  int dim = 2;
  int sets_per_class = 40;
  int cells_per_set = 1000;
  std::uint64_t seed = 0;
  /// Class names; mixtures[i] belongs to labels[i].
  std::array<std::string, 2> labels;
  std::array<std::vector<MixtureComponent>, 2> mixtures;

  /// Throws ConfigError on bad covariances, weights off the simplex, etc.
  void validate() const;
};

SyntheticSpec parse_synthetic_spec(const std::string& text);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);

/// Weights (w, 1-w) vs (1-w, w) over two unit-variance 2-D components
/// separated by `separation` along the first axis.
SyntheticSpec mixture_weight_benchmark(int sets_per_class, int cells_per_set, std::uint64_t seed,
                                       double weight = 0.3, double separation = 4.0);

/// Both classes share component means and weights; they differ only in the
/// component variances.
SyntheticSpec variance_contrast_benchmark(int sets_per_class, int cells_per_set, std::uint64_t seed,
                                          double variance_pos = 1.0, double variance_neg = 0.5);

/// Draw a single set from one class's mixture.
SampleSet sample_mixture(const std::vector<MixtureComponent>& mixture, int n, std::uint64_t seed,
                         std::string sample_id);

/// Draw every set of the spec. Sample ids are "<label>_<k>".
LabeledDataset generate(const SyntheticSpec& spec);

/// Write samples/<id>.csv and manifest.csv under `dir`; returns the manifest path.
std::filesystem::path write_dataset(const LabeledDataset& data, const std::filesystem::path& dir);

}  // namespace ckme
