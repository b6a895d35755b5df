#include "ckme/rff.hpp"

#include "ckme/errors.hpp"
#include "ckme/random.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace ckme {

RffMap RffMap::sample(Eigen::Index d, Eigen::Index D, double gamma, std::uint64_t seed) {
  if (d < 1) throw ConfigError("rff: d must be positive");
  if (D < 2 || D % 2 != 0) throw ConfigError("rff: D must be even and >= 2, got " + std::to_string(D));
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("rff: gamma must be positive");
  const double sd = std::sqrt(1.0 / gamma);
  Matrix W(d, D / 2);
  CounterRng rng(seed);
  for (Eigen::Index j = 0; j < W.cols(); ++j)
    for (Eigen::Index k = 0; k < d; ++k) W(k, j) = sd * rng.normal();
  return RffMap(std::move(W), gamma, seed);
}

RffMap::RffMap(Matrix W, double gamma, std::uint64_t seed)
    : W_(std::move(W)), gamma_(gamma), seed_(seed), scale_(std::sqrt(2.0 / static_cast<double>(2 * W_.cols()))) {
  if (W_.rows() < 1 || W_.cols() < 1) throw ConfigError("rff: empty frequency matrix");
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) throw ConfigError("rff: gamma must be positive");
  if (!W_.allFinite()) throw DataError("rff: non-finite frequency");
}

void RffMap::featurize_into(const double* x, double* out) const noexcept {
  const Eigen::Index h = half();
  const Eigen::Index dim = d();
  // Projections go to the cosine half first, then both halves are filled.
  double* proj = out + h;
  for (Eigen::Index j = 0; j < h; ++j) proj[j] = 0.0;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double xk = x[k];
    const double* wk = W_.data() + k * h;
    for (Eigen::Index j = 0; j < h; ++j) proj[j] += xk * wk[j];
  }
  for (Eigen::Index j = 0; j < h; ++j) {
    const double p = proj[j];
    out[j] = scale_ * std::sin(p);
    proj[j] = scale_ * std::cos(p);
  }
}

Vector RffMap::featurize(const CellVector& x) const {
  if (x.size() != d()) {
    throw DataError("featurize: cell has " + std::to_string(x.size()) + " features, map expects " + std::to_string(d()));
  }
  Vector out(D());
  featurize_into(x.data(), out.data());
  return out;
}

Matrix RffMap::jacobian(const CellVector& x) const {
  if (x.size() != d()) {
    throw DataError("jacobian: cell has " + std::to_string(x.size()) + " features, map expects " + std::to_string(d()));
  }
  const Eigen::Index h = half();
  const Eigen::VectorXd proj = W_.transpose() * x;
  Matrix J(D(), d());
  for (Eigen::Index j = 0; j < h; ++j) {
    const double c = scale_ * std::cos(proj[j]);
    const double s = scale_ * std::sin(proj[j]);
    for (Eigen::Index k = 0; k < d(); ++k) {
      J(j, k) = c * W_(k, j);
      J(h + j, k) = -s * W_(k, j);
    }
  }
  return J;
}

double kernel_exact(const CellVector& x, const CellVector& y, double gamma) {
  if (x.size() != y.size()) throw DataError("kernel_exact: dimension mismatch");
  if (!(gamma > 0.0)) throw ConfigError("kernel_exact: gamma must be positive");
  return std::exp(-(x - y).squaredNorm() / (2.0 * gamma));
}

}  // namespace ckme
