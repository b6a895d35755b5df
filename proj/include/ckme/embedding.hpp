#pragma once

#include "ckme/core_data.hpp"
#include "ckme/rff.hpp"

#include <string>

namespace ckme {

/// Average random feature of a sample-set.
struct MeanEmbedding {
  Vector mu;
  Eigen::Index n_cells = 0;
  std::string sample_id;
};

/// mu = (1/n) sum_i phi(x_i), compensated and independent of thread count.
MeanEmbedding mean_embedding(const RffMap& map, const SampleSet& set);

/// Per-marker arithmetic mean of the cells (the no-feature-map ablation).
CellVector naive_mean(const SampleSet& set);

/// Primal-space MMD estimate |mu_a - mu_b|.
double mmd(const RffMap& map, const SampleSet& a, const SampleSet& b);

}  // namespace ckme
