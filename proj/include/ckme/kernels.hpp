#pragma once

// Data-parallel kernels behind the pipeline. Each kernel in ckme::kernels is
// OpenMP-parallel over rows with a fixed chunk partition, so its output does
// not depend on the thread count. ckme::kernels::serial holds straightforward
// single-threaded reference versions used by the tests and the benchmark.

#include "ckme/core_data.hpp"
#include "ckme/rff.hpp"

#include <cmath>
#include <span>

namespace ckme::kernels {

/// Rows per work unit. Reductions combine per-chunk partials in chunk order.
inline constexpr Eigen::Index kChunkRows = 256;

/// n x D feature matrix, row i = phi(cells.row(i)).
Matrix featurize_rows(const RffMap& map, const Matrix& cells);

/// Compensated column means of `rows` (n x k).
Vector column_mean(const Matrix& rows);

/// Column means of phi over the cells without materializing the n x D matrix.
Vector feature_mean(const RffMap& map, const Matrix& cells);

/// out[i] = rows.row(i) . v
void row_dot(const Matrix& rows, const Vector& v, std::span<double> out);

/// out[i] = phi(cells.row(i)) . v, recomputing phi chunk by chunk.
void feature_dot(const RffMap& map, const Matrix& cells, const Vector& v, std::span<double> out);

/// Index of the nearest center (squared Euclidean, smallest index on ties)
/// for every row, plus the squared distance.
void nearest_center(const Matrix& points, const Matrix& centers, std::span<int> assign,
                    std::span<double> dist2);

namespace serial {

Matrix featurize_rows(const RffMap& map, const Matrix& cells);
Vector column_mean(const Matrix& rows);
void row_dot(const Matrix& rows, const Vector& v, std::span<double> out);
void nearest_center(const Matrix& points, const Matrix& centers, std::span<int> assign,
                    std::span<double> dist2);

}  // namespace serial

/// Neumaier-compensated accumulator for one running sum.
struct CompensatedSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double v) noexcept {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double value() const noexcept { return sum + comp; }
};

}  // namespace ckme::kernels
