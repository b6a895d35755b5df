#pragma once

#include "ckme/classifier.hpp"
#include "ckme/core_data.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ckme {

/// phi(x) . beta + bias for one cell.
double cell_score(const LinearModel& model, const CellVector& x);

/// Scores for every row of `cells`, parallel over rows.
std::vector<double> cell_scores(const LinearModel& model, const Matrix& cells);

struct ClusterModel {
  Matrix centroids;  ///< C x d
  std::vector<int> assignments;
  double inertia = 0.0;
  /// Inertia after every assignment step; non-increasing.
  std::vector<double> inertia_history;
  std::uint64_t seed = 0;
  int iterations = 0;

  int C() const noexcept { return static_cast<int>(centroids.rows()); }
};

/// Lloyd's algorithm from a seeded k-means++ start. An empty cluster is
/// re-seeded with the point farthest from its current centroid.
/// Throws DataError when there are fewer than C distinct rows.
ClusterModel kmeans(const Matrix& cells, int C, std::uint64_t seed, int max_iter = 300);

/// s(nu_c) = phi(nu_c) . beta + bias for every centroid.
std::vector<double> centroid_scores(const LinearModel& model, const ClusterModel& clusters);

/// s(G_c): mean score of the cells assigned to each cluster. `cells` must be
/// the matrix the clusters were fit on.
std::vector<double> average_scores(const LinearModel& model, const ClusterModel& clusters,
                                   const Matrix& cells);

/// Pearson correlation; throws NumericalError on zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Fraction of the set's cells nearest to each centroid.
Vector cluster_frequencies(const SampleSet& set, const ClusterModel& clusters);

/// Linear hinge-loss model on per-sample cluster frequencies.
struct FrequencyModel {
  Vector alpha;
  double bias = 0.0;

  double predict(const Vector& freqs) const { return freqs.dot(alpha) + bias; }
};

FrequencyModel train_frequency_model(const std::vector<Vector>& freqs, const std::vector<int>& labels,
                                     double reg_c, const SolverOptions& options = {});

/// sum_c r_c s_c with fixed per-cluster scores.
double frequency_score_predict(const Vector& freqs, std::span<const double> cluster_scores);

/// d/dx (phi(x) . beta) = J(x)^T beta.
Vector score_gradient(const LinearModel& model, const CellVector& x);

struct RankSumResult {
  double p_value = 1.0;
  /// Rank sum of the first sample (midranks on ties).
  double statistic = 0.0;
  bool exact = true;
};

/// Two-sided Wilcoxon rank-sum test. Exact enumeration of the rank-sum null
/// when min(n_a, n_b) <= 20 and n_a + n_b <= 25, otherwise the normal
/// approximation with tie and continuity corrections. p is clamped to (0, 1].
RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b);

}  // namespace ckme
