#pragma once

#include "ckme/core_data.hpp"
#include "ckme/embedding.hpp"
#include "ckme/herding.hpp"
#include "ckme/preprocess.hpp"
#include "ckme/rff.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ckme {

struct SolverOptions {
  double tol = 1e-6;
  long max_iter = 100000;
};

/// Result of the linear hinge-loss solver.
struct LinearFit {
  Vector beta;
  double bias = 0.0;
  long iterations = 0;
  bool converged = false;
  /// Dual objective 0.5 a^T Q a - sum(a), one entry per iteration; non-increasing.
  std::vector<double> objective_history;
  double primal_objective = 0.0;
  double duality_gap = 0.0;
};

/// Minimize 0.5 |beta|^2 + reg_c * mean_k max(0, 1 - y_k (x_k . beta + b))
/// with b unregularized. Rows of `features` are examples; labels are -1/+1.
///
/// Solved in the dual by SMO with second-order working-set selection
/// (linear kernel, N x N Gram). Pair selection uses a fixed scan order, so the
/// result is deterministic. Converges when the maximal KKT violation or the
/// relative duality gap drops below tol; otherwise the last iterate is
/// returned with converged = false.
LinearFit train_linear(const Matrix& features, const std::vector<int>& labels, double reg_c,
                       const SolverOptions& options = {});

/// Everything needed to reproduce the feature pipeline at predict time.
struct TrainMeta {
  std::uint64_t seed = 0;
  Preprocessing preprocessing;
  SubsampleMethod subsample = SubsampleMethod::herding;
  /// Cells kept per set; 0 means all cells.
  Eigen::Index m = 200;
  std::array<std::string, 2> label_names{"-1", "+1"};
  std::vector<std::string> marker_names;
};

/// Linear scorer over mean embeddings: f(mu) = mu . beta + bias.
struct LinearModel {
  RffMap rff;
  Vector beta;
  double bias = 0.0;
  double reg_c = 1.0;
  TrainMeta meta;
};

/// Fit the scorer on precomputed embeddings.
LinearModel train(const RffMap& map, const std::vector<MeanEmbedding>& embeddings,
                  const std::vector<int>& labels, double reg_c, const SolverOptions& options = {},
                  TrainMeta meta = {});

/// mu . beta + bias.
double decision(const LinearModel& model, const MeanEmbedding& embedding);
double decision(const LinearModel& model, const Vector& mu);

/// Sign with zero mapped to +1.
inline int predicted_label(double decision_value) noexcept { return decision_value >= 0.0 ? 1 : -1; }

inline constexpr int kModelVersion = 1;

void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);

}  // namespace ckme
