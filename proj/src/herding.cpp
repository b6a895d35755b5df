#include "ckme/herding.hpp"

#include "ckme/errors.hpp"
#include "ckme/kernels.hpp"
#include "ckme/random.hpp"

#include <limits>
#include <numeric>
#include <string>

namespace ckme {

std::string_view to_string(SubsampleMethod method) noexcept {
  return method == SubsampleMethod::uniform ? "uniform" : "herding";
}

SubsampleMethod parse_subsample_method(std::string_view text) {
  if (text == "herding") return SubsampleMethod::herding;
  if (text == "uniform") return SubsampleMethod::uniform;
  throw ConfigError("subsample method must be herding or uniform, got '" + std::string(text) + "'");
}

namespace {

void check_m(const SampleSet& set, Eigen::Index m) {
  if (m <= 0) throw ConfigError("m must be positive, got " + std::to_string(m));
  if (m > set.n()) {
    throw ConfigError("m = " + std::to_string(m) + " exceeds the " + std::to_string(set.n()) + " cells of sample '" +
                      set.sample_id() + "'");
  }
}

/// Largest score among unselected cells; strict comparison keeps the lowest index.
Eigen::Index argmax_unselected(const std::vector<double>& scores, const std::vector<char>& taken) {
  Eigen::Index best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (taken[i]) continue;
    if (best < 0 || scores[i] > best_score) {
      best = static_cast<Eigen::Index>(i);
      best_score = scores[i];
    }
  }
  return best;
}

void step_theta(Vector& theta, const Vector& theta0, const double* phi) {
  for (Eigen::Index j = 0; j < theta.size(); ++j) theta[j] = (theta[j] + theta0[j]) - phi[j];
}

}  // namespace

HerdingResult herd(const RffMap& map, const SampleSet& set, Eigen::Index m, const HerdingOptions& options) {
  check_m(set, m);
  if (set.d() != map.d()) throw DataError("herd: sample '" + set.sample_id() + "' dimension mismatch");
  const Eigen::Index n = set.n();
  const Eigen::Index D = map.D();
  const bool cached = static_cast<double>(n) * static_cast<double>(D) * sizeof(double) <=
                      static_cast<double>(options.cache_bytes);

  Matrix phi;
  Vector theta0;
  if (cached) {
    phi = kernels::featurize_rows(map, set.cells());
    theta0 = kernels::column_mean(phi);
  } else {
    theta0 = kernels::feature_mean(map, set.cells());
  }
  Vector theta = theta0;
  Vector chosen(D);
  std::vector<double> scores(n);
  std::vector<char> taken(n, 0);

  HerdingResult result;
  result.method = SubsampleMethod::herding;
  result.selected_indices.reserve(m);
  for (Eigen::Index t = 0; t < m; ++t) {
    if (cached) {
      kernels::row_dot(phi, theta, scores);
    } else {
      kernels::feature_dot(map, set.cells(), theta, scores);
    }
    const Eigen::Index best = argmax_unselected(scores, taken);
    taken[best] = 1;
    result.selected_indices.push_back(best);
    if (cached) {
      step_theta(theta, theta0, phi.row(best).data());
    } else {
      map.featurize_into(set.cells().row(best).data(), chosen.data());
      step_theta(theta, theta0, chosen.data());
    }
  }
  return result;
}

HerdingResult herd_serial(const RffMap& map, const SampleSet& set, Eigen::Index m) {
  check_m(set, m);
  const Matrix phi = kernels::serial::featurize_rows(map, set.cells());
  const Vector theta0 = kernels::serial::column_mean(phi);
  Vector theta = theta0;
  std::vector<double> scores(set.n());
  std::vector<char> taken(set.n(), 0);
  HerdingResult result;
  for (Eigen::Index t = 0; t < m; ++t) {
    kernels::serial::row_dot(phi, theta, scores);
    const Eigen::Index best = argmax_unselected(scores, taken);
    taken[best] = 1;
    result.selected_indices.push_back(best);
    step_theta(theta, theta0, phi.row(best).data());
  }
  return result;
}

HerdingResult uniform_subsample(const SampleSet& set, Eigen::Index m, std::uint64_t seed) {
  check_m(set, m);
  std::vector<Eigen::Index> idx(set.n());
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  CounterRng rng(seed);
  const auto n = static_cast<std::uint64_t>(set.n());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto j = static_cast<Eigen::Index>(i + rng.below(n - static_cast<std::uint64_t>(i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(m);
  return {std::move(idx), SubsampleMethod::uniform};
}

SampleSet subset(const SampleSet& set, const HerdingResult& result) {
  if (result.selected_indices.empty()) throw DataError("subset: no indices selected");
  Matrix cells(static_cast<Eigen::Index>(result.selected_indices.size()), set.d());
  for (std::size_t r = 0; r < result.selected_indices.size(); ++r) {
    const Eigen::Index i = result.selected_indices[r];
    if (i < 0 || i >= set.n()) {
      throw DataError("subset: index " + std::to_string(i) + " out of range for " + std::to_string(set.n()) + " cells");
    }
    cells.row(static_cast<Eigen::Index>(r)) = set.cells().row(i);
  }
  return SampleSet(set.sample_id(), set.marker_names(), std::move(cells));
}

}  // namespace ckme
