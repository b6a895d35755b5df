#pragma once

#include "ckme/core_data.hpp"

#include <cstdint>

namespace ckme {

/// Frozen random Fourier feature map for the RBF kernel
/// k(x, x') = exp(-|x - x'|^2 / (2 gamma)).
///
/// phi(x) = sqrt(2/D) * [sin(W^T x), cos(W^T x)], sines first. W is d x D/2
/// with i.i.d. N(0, 1/gamma) entries, so phi(x)^T phi(x') is an unbiased
/// estimate of k(x, x') and |phi(x)| = 1.
class RffMap {
 public:
  /// Draw W from the seeded counter generator (column-major draw order:
  /// all d entries of frequency 0, then frequency 1, ...).
  static RffMap sample(Eigen::Index d, Eigen::Index D, double gamma, std::uint64_t seed);

  /// Rebuild from serialized fields; validates shapes.
  RffMap(Matrix W, double gamma, std::uint64_t seed);

  Eigen::Index d() const noexcept { return W_.rows(); }
  Eigen::Index D() const noexcept { return 2 * W_.cols(); }
  Eigen::Index half() const noexcept { return W_.cols(); }
  double gamma() const noexcept { return gamma_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double scale() const noexcept { return scale_; }
  /// d x D/2, column j is frequency omega_j.
  const Matrix& W() const noexcept { return W_; }

  Vector featurize(const CellVector& x) const;
  /// Writes phi(x) into out[0..D). x has d entries.
  void featurize_into(const double* x, double* out) const noexcept;

  /// D x d matrix d phi / d x.
  Matrix jacobian(const CellVector& x) const;

 private:
  Matrix W_;
  double gamma_;
  std::uint64_t seed_;
  double scale_;
};

/// exp(-|x - y|^2 / (2 gamma)).
double kernel_exact(const CellVector& x, const CellVector& y, double gamma);

}  // namespace ckme
