// Reference versions of the kernels in kernels.cpp: one thread, no chunking,
// textbook loop order. Only tests and the benchmark call these.

#include "ckme/kernels.hpp"

#include "ckme/errors.hpp"

#include <limits>
#include <vector>

namespace ckme::kernels::serial {

Matrix featurize_rows(const RffMap& map, const Matrix& cells) {
  if (cells.cols() != map.d()) throw DataError("featurize_rows: dimension mismatch");
  Matrix out(cells.rows(), map.D());
  for (Eigen::Index r = 0; r < cells.rows(); ++r) {
    const Eigen::VectorXd x = cells.row(r).transpose();
    out.row(r) = map.featurize(x).transpose();
  }
  return out;
}

Vector column_mean(const Matrix& rows) {
  if (rows.rows() < 1) throw DataError("mean of an empty row set");
  std::vector<CompensatedSum> acc(rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    for (Eigen::Index j = 0; j < rows.cols(); ++j) acc[j].add(rows(r, j));
  Vector mean(rows.cols());
  for (Eigen::Index j = 0; j < rows.cols(); ++j) mean[j] = acc[j].value() / static_cast<double>(rows.rows());
  return mean;
}

void row_dot(const Matrix& rows, const Vector& v, std::span<double> out) {
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) s += rows(r, j) * v[j];
    out[r] = s;
  }
}

void nearest_center(const Matrix& points, const Matrix& centers, std::span<int> assign, std::span<double> dist2) {
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (Eigen::Index c = 0; c < centers.rows(); ++c) {
      const double s = (points.row(i) - centers.row(c)).squaredNorm();
      if (s < best) {
        best = s;
        arg = static_cast<int>(c);
      }
    }
    assign[i] = arg;
    dist2[i] = best;
  }
}

}  // namespace ckme::kernels::serial
