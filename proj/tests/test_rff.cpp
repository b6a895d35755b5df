#include "ckme/errors.hpp"
#include "ckme/rff.hpp"
#include "support.hpp"

#include <cmath>

using namespace ckme;

namespace {

double sample_variance(const Matrix& W) {
  const double n = static_cast<double>(W.size());
  const double mean = W.sum() / n;
  return (W.array() - mean).square().sum() / (n - 1.0);
}

}  // namespace

TEST_CASE("frequency matrix statistics") {
  const RffMap sharp = RffMap::sample(1, 200000, 1e12, 3);
  CHECK(sharp.W().size() == 100000);
  CHECK(sample_variance(sharp.W()) <= 2e-12);

  const RffMap wide = RffMap::sample(1, 200000, 4.0, 9);
  const double v = sample_variance(wide.W());
  CHECK(v >= 0.24);
  CHECK(v <= 0.26);
  CHECK(std::abs(wide.W().mean()) < 0.01);
}

TEST_CASE("sampling is deterministic in the seed") {
  const RffMap a = RffMap::sample(3, 10, 1.0, 7);
  const RffMap b = RffMap::sample(3, 10, 1.0, 7);
  const RffMap c = RffMap::sample(3, 10, 1.0, 8);
  CHECK(a.W() == b.W());
  CHECK(a.W() != c.W());
  CHECK(a.d() == 3);
  CHECK(a.D() == 10);
  CHECK(a.half() == 5);
  CHECK_THROWS_AS(RffMap::sample(3, 9, 1.0, 1), ConfigError);
  CHECK_THROWS_AS(RffMap::sample(3, 10, 0.0, 1), ConfigError);
}

TEST_CASE("feature map structure") {
  const RffMap map = RffMap::sample(4, 64, 2.0, 1);
  const Vector phi0 = map.featurize(Vector::Zero(4));
  CHECK(map.scale() == doctest::Approx(std::sqrt(2.0 / 64.0)));
  for (Eigen::Index j = 0; j < 32; ++j) {
    CHECK(phi0[j] == 0.0);
    CHECK(phi0[32 + j] == map.scale());
  }
  CounterRng rng(5);
  for (int t = 0; t < 50; ++t) {
    Vector x(4);
    for (auto& v : x) v = 5.0 * rng.normal();
    CHECK(std::abs(map.featurize(x).squaredNorm() - 1.0) <= 1e-12);
  }
  CHECK_THROWS_AS(map.featurize(Vector::Zero(3)), DataError);
}

TEST_CASE("feature map matches explicit sin/cos") {
  const RffMap map = RffMap::sample(3, 20, 1.5, 4);
  const Vector x = (Vector(3) << 0.3, -1.2, 2.0).finished();
  const Vector phi = map.featurize(x);
  for (Eigen::Index j = 0; j < 10; ++j) {
    double proj = 0.0;
    for (Eigen::Index k = 0; k < 3; ++k) proj += map.W()(k, j) * x[k];
    CHECK(phi[j] == doctest::Approx(std::sqrt(0.1) * std::sin(proj)).epsilon(1e-13));
    CHECK(phi[10 + j] == doctest::Approx(std::sqrt(0.1) * std::cos(proj)).epsilon(1e-13));
  }
}

TEST_CASE("inner products approximate the exact kernel") {
  const RffMap map = RffMap::sample(2, 2000, 1.0, 21);
  CounterRng rng(99);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    Vector x(2), y(2);
    for (auto& v : x) v = rng.normal();
    Vector dir(2);
    for (auto& v : dir) v = rng.normal();
    y = x + dir.normalized() * (3.0 * rng.uniform());
    const double oracle = std::exp(-(x - y).squaredNorm() / 2.0);
    worst = std::max(worst, std::abs(map.featurize(x).dot(map.featurize(y)) - oracle));
  }
  CHECK(worst <= 0.05);
}

TEST_CASE("exact kernel") {
  const Vector x = (Vector(2) << 1.0, -2.0).finished();
  CHECK(kernel_exact(x, x, 3.0) == 1.0);
  const Vector y = x + (Vector(2) << std::sqrt(2.0), 0.0).finished();  // squared distance 2 = 2 gamma
  CHECK(kernel_exact(x, y, 1.0) == doctest::Approx(0.3678794412).epsilon(1e-10));
  const Vector z = x + (Vector(2) << 4.0, 0.0).finished();
  CHECK(kernel_exact(x, z, 8.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("jacobian") {
  const RffMap map = RffMap::sample(3, 40, 1.0, 13);
  const Matrix J0 = map.jacobian(Vector::Zero(3));
  CHECK(J0.rows() == 40);
  CHECK(J0.cols() == 3);
  for (Eigen::Index j = 0; j < 20; ++j) {
    CHECK((J0.row(j).transpose() - map.scale() * map.W().col(j)).cwiseAbs().maxCoeff() == 0.0);
    CHECK(J0.row(20 + j).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("central differences") {
    CounterRng rng(17);
    const double h = 1e-6;
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
      Vector x(3);
      for (auto& v : x) v = rng.normal();
      const Matrix J = map.jacobian(x);
      for (Eigen::Index k = 0; k < 3; ++k) {
        Vector xp = x, xm = x;
        xp[k] += h;
        xm[k] -= h;
        const Vector fd = (map.featurize(xp) - map.featurize(xm)) / (2.0 * h);
        worst = std::max(worst, (fd - J.col(k)).norm() / std::max(J.col(k).norm(), 1e-12));
      }
    }
    CHECK(worst <= 1e-5);
  }

  SUBCASE("depends on x only through the projections") {
    // Rank-1 map: any two points with the same projection onto w share a jacobian.
    Matrix W(2, 1);
    W << 1.0, 2.0;
    const RffMap line(W, 1.0, 0);
    const Vector a = (Vector(2) << 1.0, 0.5).finished();
    const Vector b = (Vector(2) << 0.0, 1.0).finished();
    CHECK(line.jacobian(a) == line.jacobian(b));
  }
}
