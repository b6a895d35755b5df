#include "ckme/embedding.hpp"
#include "ckme/errors.hpp"
#include "ckme/rff.hpp"
#include "support.hpp"

#include <cmath>

using namespace ckme;

namespace {

/// Biased squared MMD with the exact kernel, by direct double sums.
double exact_mmd2(const Matrix& a, const Matrix& b, double gamma) {
  auto mean_k = [gamma](const Matrix& x, const Matrix& y) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < y.rows(); ++j) s += kernel_exact(x.row(i).transpose(), y.row(j).transpose(), gamma);
    return s / static_cast<double>(x.rows() * y.rows());
  };
  return mean_k(a, a) + mean_k(b, b) - 2.0 * mean_k(a, b);
}

}  // namespace

TEST_CASE("mean embedding of trivial sets") {
  const RffMap map = RffMap::sample(2, 100, 1.0, 3);
  const auto single = test::make_set({{0.5, -1.0}});
  const auto mu = mean_embedding(map, single);
  CHECK(mu.n_cells == 1);
  CHECK(mu.sample_id == "s");
  CHECK((mu.mu - map.featurize(single.cell(0))).cwiseAbs().maxCoeff() <= 1e-15);

  const auto repeated = test::make_set({{0.5, -1.0}, {0.5, -1.0}, {0.5, -1.0}, {0.5, -1.0}});
  CHECK((mean_embedding(map, repeated).mu - mu.mu).cwiseAbs().maxCoeff() <= 1e-15);

  const auto set = test::gaussian_set(700, 2, 4);
  Matrix twice(1400, 2);
  twice << set.cells(), set.cells();
  const auto dup = mean_embedding(map, SampleSet("d", set.marker_names(), twice));
  CHECK((dup.mu - mean_embedding(map, set).mu).cwiseAbs().maxCoeff() <= 1e-12);

  CHECK_THROWS_AS(mean_embedding(map, test::make_set({{1.0, 2.0, 3.0}})), DataError);
}

TEST_CASE("mean embedding equals the average of feature vectors") {
  const RffMap map = RffMap::sample(3, 50, 2.0, 8);
  const auto set = test::gaussian_set(300, 3, 1);
  Vector oracle = Vector::Zero(50);
  for (Eigen::Index i = 0; i < set.n(); ++i) oracle += map.featurize(set.cell(i));
  oracle /= 300.0;
  CHECK((mean_embedding(map, set).mu - oracle).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("naive mean") {
  const auto m = naive_mean(test::make_set({{0, 0}, {2, 4}}));
  CHECK(m[0] == 1.0);
  CHECK(m[1] == 2.0);
  CHECK(naive_mean(test::make_set({{3, 7}}))[1] == 7.0);

  const auto a = test::gaussian_set(500, 3, 2, 5.0);
  const auto st = fit_standardizer({a});
  CHECK(naive_mean(apply_standardizer(st, a)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("mmd") {
  const RffMap map = RffMap::sample(2, 2000, 1.0, 5);
  const auto a = test::gaussian_set(500, 2, 1);
  CHECK(mmd(map, a, a) <= 1e-12);

  double same_worst = 0.0;
  double same_mean = 0.0;
  double far_min = 1e9;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = test::gaussian_set(500, 2, 100 + s);
    const auto y = test::gaussian_set(500, 2, 200 + s);
    const auto z = test::gaussian_set(500, 2, 300 + s, 3.0);
    const double same = mmd(map, x, y);
    same_worst = std::max(same_worst, same);
    same_mean += same / 20.0;
    far_min = std::min(far_min, mmd(map, x, z));
  }
  CHECK(same_worst <= 0.2);
  CHECK(far_min >= 5.0 * same_mean);
}

TEST_CASE("mmd tracks the exact-kernel value") {
  const RffMap map = RffMap::sample(2, 4000, 1.0, 6);
  const auto a = test::gaussian_set(150, 2, 31);
  const auto b = test::gaussian_set(150, 2, 32, 1.0);
  const double approx = mmd(map, a, b);
  CHECK(std::abs(approx * approx - exact_mmd2(a.cells(), b.cells(), 1.0)) <= 0.02);
}
