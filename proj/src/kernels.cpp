#include "ckme/kernels.hpp"

#include "ckme/errors.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace ckme::kernels {

namespace {

/// Eight-lane dot product with a fixed reduction tree, independent of
/// pointer alignment.
inline double dot_fixed(const double* a, const double* b, Eigen::Index n) noexcept {
  double acc[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  Eigen::Index i = 0;
  for (; i + 8 <= n; i += 8)
    for (int l = 0; l < 8; ++l) acc[l] += a[i + l] * b[i + l];
  for (int l = 0; i < n; ++i, ++l) acc[l] += a[i] * b[i];
  return ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
}

Eigen::Index chunk_count(Eigen::Index n) { return (n + kChunkRows - 1) / kChunkRows; }

/// Chunks processed concurrently before their partials are folded in.
constexpr Eigen::Index kWave = 64;

/// Compensated column sums over rows produced by `fill(row, buffer)`.
/// Partials are per chunk and folded in chunk order, so the result does not
/// depend on scheduling.
template <class Fill>
Vector chunked_mean(Eigen::Index n, Eigen::Index width, Fill fill) {
  std::vector<CompensatedSum> total(width);
  std::vector<CompensatedSum> partial;
  const Eigen::Index chunks = chunk_count(n);
  for (Eigen::Index wave = 0; wave < chunks; wave += kWave) {
    const Eigen::Index in_wave = std::min(kWave, chunks - wave);
    partial.assign(static_cast<std::size_t>(in_wave * width), CompensatedSum{});
#pragma omp parallel
    {
      std::vector<double> row(width);
#pragma omp for schedule(static)
      for (Eigen::Index c = 0; c < in_wave; ++c) {
        CompensatedSum* acc = partial.data() + c * width;
        const Eigen::Index begin = (wave + c) * kChunkRows;
        const Eigen::Index end = std::min(n, begin + kChunkRows);
        for (Eigen::Index r = begin; r < end; ++r) {
          fill(r, row.data());
          for (Eigen::Index j = 0; j < width; ++j) acc[j].add(row[j]);
        }
      }
    }
    for (Eigen::Index c = 0; c < in_wave; ++c) {
      const CompensatedSum* acc = partial.data() + c * width;
      for (Eigen::Index j = 0; j < width; ++j) {
        total[j].add(acc[j].sum);
        total[j].add(acc[j].comp);
      }
    }
  }
  Vector mean(width);
  const double inv = 1.0 / static_cast<double>(n);
  for (Eigen::Index j = 0; j < width; ++j) mean[j] = total[j].value() * inv;
  return mean;
}

void check_rows(const RffMap& map, const Matrix& cells) {
  if (cells.cols() != map.d()) {
    throw DataError("cells have " + std::to_string(cells.cols()) + " features, map expects " + std::to_string(map.d()));
  }
}

}  // namespace

Matrix featurize_rows(const RffMap& map, const Matrix& cells) {
  check_rows(map, cells);
  const Eigen::Index n = cells.rows();
  Matrix out(n, map.D());
  const Eigen::Index chunks = chunk_count(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index end = std::min(n, (c + 1) * kChunkRows);
    for (Eigen::Index r = c * kChunkRows; r < end; ++r) map.featurize_into(cells.row(r).data(), out.row(r).data());
  }
  return out;
}

Vector column_mean(const Matrix& rows) {
  if (rows.rows() < 1) throw DataError("mean of an empty row set");
  const Eigen::Index width = rows.cols();
  return chunked_mean(rows.rows(), width, [&rows, width](Eigen::Index r, double* buf) {
    std::copy_n(rows.row(r).data(), width, buf);
  });
}

Vector feature_mean(const RffMap& map, const Matrix& cells) {
  check_rows(map, cells);
  if (cells.rows() < 1) throw DataError("mean of an empty row set");
  return chunked_mean(cells.rows(), map.D(),
                      [&map, &cells](Eigen::Index r, double* buf) { map.featurize_into(cells.row(r).data(), buf); });
}

void row_dot(const Matrix& rows, const Vector& v, std::span<double> out) {
  const Eigen::Index n = rows.rows();
  const Eigen::Index width = rows.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index r = 0; r < n; ++r) out[r] = dot_fixed(rows.row(r).data(), v.data(), width);
}

void feature_dot(const RffMap& map, const Matrix& cells, const Vector& v, std::span<double> out) {
  check_rows(map, cells);
  const Eigen::Index n = cells.rows();
  const Eigen::Index width = map.D();
  const Eigen::Index chunks = chunk_count(n);
#pragma omp parallel
  {
    std::vector<double> phi(width);
#pragma omp for schedule(static)
    for (Eigen::Index c = 0; c < chunks; ++c) {
      const Eigen::Index end = std::min(n, (c + 1) * kChunkRows);
      for (Eigen::Index r = c * kChunkRows; r < end; ++r) {
        map.featurize_into(cells.row(r).data(), phi.data());
        out[r] = dot_fixed(phi.data(), v.data(), width);
      }
    }
  }
}

void nearest_center(const Matrix& points, const Matrix& centers, std::span<int> assign, std::span<double> dist2) {
  const Eigen::Index n = points.rows();
  const Eigen::Index C = centers.rows();
  const Eigen::Index d = points.cols();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < C; ++c) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const double diff = points(i, k) - centers(c, k);
        s += diff * diff;
      }
      if (s < best) {
        best = s;
        arg = static_cast<int>(c);
      }
    }
    assign[i] = arg;
    dist2[i] = best;
  }
}

}  // namespace ckme::kernels
