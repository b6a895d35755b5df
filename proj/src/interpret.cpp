#include "ckme/interpret.hpp"

#include "ckme/errors.hpp"
#include "ckme/kernels.hpp"
#include "ckme/random.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

namespace ckme {

namespace {

void check_dim(const LinearModel& model, Eigen::Index d, const char* what) {
  if (d != model.rff.d()) {
    throw DataError(std::string(what) + ": cell has " + std::to_string(d) + " features, model expects " +
                    std::to_string(model.rff.d()));
  }
}

Eigen::Index count_distinct_rows(const Matrix& cells) {
  std::vector<Eigen::Index> order(cells.rows());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto less = [&cells](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index k = 0; k < cells.cols(); ++k) {
      if (cells(a, k) != cells(b, k)) return cells(a, k) < cells(b, k);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  Eigen::Index distinct = order.empty() ? 0 : 1;
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (less(order[i - 1], order[i])) ++distinct;
  }
  return distinct;
}

Matrix kmeanspp_init(const Matrix& cells, int C, CounterRng& rng) {
  const Eigen::Index n = cells.rows();
  Matrix centers(C, cells.cols());
  centers.row(0) = cells.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
  std::vector<double> d2(n);
  for (Eigen::Index i = 0; i < n; ++i) d2[i] = (cells.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < C; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    const double target = rng.uniform() * total;
    Eigen::Index pick = -1;
    double cum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      pick = i;
      cum += d2[i];
      if (cum > target) break;
    }
    centers.row(c) = cells.row(pick);
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = std::min(d2[i], (cells.row(i) - centers.row(c)).squaredNorm());
  }
  return centers;
}

double sum_of(const std::vector<double>& v) {
  kernels::CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value();
}

}  // namespace

double cell_score(const LinearModel& model, const CellVector& x) {
  check_dim(model, x.size(), "cell_score");
  // Same kernel as cell_scores so both agree to the last bit.
  const Matrix row = x.transpose();
  double s = 0.0;
  kernels::feature_dot(model.rff, row, model.beta, std::span<double>(&s, 1));
  return s + model.bias;
}

std::vector<double> cell_scores(const LinearModel& model, const Matrix& cells) {
  check_dim(model, cells.cols(), "cell_scores");
  std::vector<double> out(cells.rows());
  kernels::feature_dot(model.rff, cells, model.beta, out);
  for (double& s : out) s += model.bias;
  return out;
}

ClusterModel kmeans(const Matrix& cells, int C, std::uint64_t seed, int max_iter) {
  if (C < 2) throw ConfigError("kmeans: C must be at least 2, got " + std::to_string(C));
  if (max_iter < 1) throw ConfigError("kmeans: max_iter must be positive");
  const Eigen::Index n = cells.rows();
  if (count_distinct_rows(cells) < C) {
    throw DataError("kmeans: fewer than C = " + std::to_string(C) + " distinct points");
  }

  CounterRng rng(seed);
  ClusterModel model;
  model.seed = seed;
  model.centroids = kmeanspp_init(cells, C, rng);
  model.assignments.assign(n, -1);
  std::vector<int> assign(n);
  std::vector<double> d2(n);
  std::vector<Eigen::Index> sizes(C);

  auto assign_step = [&] {
    kernels::nearest_center(cells, model.centroids, assign, d2);
    // Re-seed empty clusters with the point farthest from its centroid,
    // taken from a cluster that keeps at least one other member.
    for (int guard = 0; guard < C; ++guard) {
      std::fill(sizes.begin(), sizes.end(), 0);
      for (int a : assign) ++sizes[a];
      const auto empty = std::find(sizes.begin(), sizes.end(), 0);
      if (empty == sizes.end()) break;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (sizes[assign[i]] < 2) continue;
        if (far < 0 || d2[i] > d2[far]) far = i;
      }
      model.centroids.row(empty - sizes.begin()) = cells.row(far);
      kernels::nearest_center(cells, model.centroids, assign, d2);
    }
  };

  model.iterations = 0;
  while (true) {
    assign_step();
    model.inertia_history.push_back(sum_of(d2));
    const bool stable = assign == model.assignments;
    model.assignments = assign;
    if (stable || model.iterations >= max_iter) break;
    ++model.iterations;
    Matrix sums = Matrix::Zero(C, cells.cols());
    std::vector<Eigen::Index> first(C, -1);
    std::vector<char> constant(C, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = assign[i];
      sums.row(c) += cells.row(i);
      if (first[c] < 0) first[c] = i;
      else if (constant[c] && cells.row(i) != cells.row(first[c])) constant[c] = 0;
    }
    for (int c = 0; c < C; ++c) {
      if (sizes[c] == 0) continue;
      // A cluster of identical points keeps that point exactly.
      if (constant[c]) model.centroids.row(c) = cells.row(first[c]);
      else model.centroids.row(c) = sums.row(c) / static_cast<double>(sizes[c]);
    }
  }
  model.inertia = model.inertia_history.back();
  return model;
}

std::vector<double> centroid_scores(const LinearModel& model, const ClusterModel& clusters) {
  check_dim(model, clusters.centroids.cols(), "centroid_scores");
  std::vector<double> out(clusters.C());
  for (int c = 0; c < clusters.C(); ++c) out[c] = cell_score(model, clusters.centroids.row(c).transpose());
  return out;
}

std::vector<double> average_scores(const LinearModel& model, const ClusterModel& clusters, const Matrix& cells) {
  if (static_cast<Eigen::Index>(clusters.assignments.size()) != cells.rows()) {
    throw DataError("average_scores: cells do not match the clustered point set");
  }
  const auto scores = cell_scores(model, cells);
  std::vector<kernels::CompensatedSum> sums(clusters.C());
  std::vector<Eigen::Index> counts(clusters.C(), 0);
  std::vector<double> lo(clusters.C(), HUGE_VAL), hi(clusters.C(), -HUGE_VAL);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int c = clusters.assignments[i];
    sums[c].add(scores[i]);
    ++counts[c];
    lo[c] = std::min(lo[c], scores[i]);
    hi[c] = std::max(hi[c], scores[i]);
  }
  std::vector<double> out(clusters.C());
  for (int c = 0; c < clusters.C(); ++c) {
    if (counts[c] == 0) throw DataError("average_scores: cluster " + std::to_string(c) + " is empty");
    out[c] = lo[c] == hi[c] ? lo[c] : sums[c].value() / static_cast<double>(counts[c]);
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DataError("pearson: length mismatch");
  if (a.size() < 2) throw DataError("pearson: need at least two values");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) throw NumericalError("pearson: zero variance");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Vector cluster_frequencies(const SampleSet& set, const ClusterModel& clusters) {
  if (set.d() != clusters.centroids.cols()) throw DataError("cluster_frequencies: dimension mismatch");
  std::vector<int> assign(set.n());
  std::vector<double> d2(set.n());
  kernels::nearest_center(set.cells(), clusters.centroids, assign, d2);
  Vector freq = Vector::Zero(clusters.C());
  for (int a : assign) freq[a] += 1.0;
  return freq / static_cast<double>(set.n());
}

FrequencyModel train_frequency_model(const std::vector<Vector>& freqs, const std::vector<int>& labels, double reg_c,
                                     const SolverOptions& options) {
  if (freqs.empty()) throw DataError("train_frequency_model: no examples");
  Matrix X(static_cast<Eigen::Index>(freqs.size()), freqs.front().size());
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (freqs[k].size() != X.cols()) throw DataError("train_frequency_model: length mismatch");
    X.row(static_cast<Eigen::Index>(k)) = freqs[k].transpose();
  }
  LinearFit fit = train_linear(X, labels, reg_c, options);
  return {std::move(fit.beta), fit.bias};
}

double frequency_score_predict(const Vector& freqs, std::span<const double> cluster_scores) {
  if (static_cast<std::size_t>(freqs.size()) != cluster_scores.size()) {
    throw DataError("frequency_score_predict: length mismatch");
  }
  double s = 0.0;
  for (std::size_t c = 0; c < cluster_scores.size(); ++c) s += freqs[static_cast<Eigen::Index>(c)] * cluster_scores[c];
  return s;
}

Vector score_gradient(const LinearModel& model, const CellVector& x) {
  check_dim(model, x.size(), "score_gradient");
  // sum_j scale * (beta_j cos(w_j.x) - beta_{h+j} sin(w_j.x)) * w_j
  const auto& rff = model.rff;
  const Eigen::Index h = rff.half();
  const Vector proj = rff.W().transpose() * x;
  Vector weights(h);
  for (Eigen::Index j = 0; j < h; ++j) {
    weights[j] = rff.scale() * (model.beta[j] * std::cos(proj[j]) - model.beta[h + j] * std::sin(proj[j]));
  }
  return rff.W() * weights;
}

RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DataError("rank_sum_test: both samples must be non-empty");
  const std::size_t n1 = a.size(), n2 = b.size(), N = n1 + n2;
  std::vector<std::pair<double, int>> pooled;
  pooled.reserve(N);
  for (double v : a) pooled.emplace_back(v, 0);
  for (double v : b) pooled.emplace_back(v, 1);
  for (const auto& p : pooled) {
    if (!std::isfinite(p.first)) throw DataError("rank_sum_test: non-finite value");
  }
  std::sort(pooled.begin(), pooled.end());

  // Doubled midranks keep tied ranks integral.
  std::vector<long> rank2(N);
  double tie_term = 0.0;
  for (std::size_t s = 0; s < N;) {
    std::size_t e = s + 1;
    while (e < N && pooled[e].first == pooled[s].first) ++e;
    for (std::size_t i = s; i < e; ++i) rank2[i] = static_cast<long>(s + 1 + e);
    const double t = static_cast<double>(e - s);
    tie_term += t * t * t - t;
    s = e;
  }
  long w2 = 0;
  for (std::size_t i = 0; i < N; ++i) {
    if (pooled[i].second == 0) w2 += rank2[i];
  }
  const long expected2 = static_cast<long>(n1 * (N + 1));

  RankSumResult result;
  result.statistic = 0.5 * static_cast<double>(w2);
  result.exact = std::min(n1, n2) <= 20 && N <= 25;
  if (result.exact) {
    // ways[k][s]: subsets of size k whose doubled rank sum is s.
    const long max_sum = 2 * static_cast<long>(N) * static_cast<long>(n1);
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t k = std::min(i + 1, n1); k >= 1; --k) {
        auto& dst = ways[k];
        const auto& src = ways[k - 1];
        for (long s = max_sum; s >= rank2[i]; --s) dst[s] += src[s - rank2[i]];
      }
    }
    const long observed = std::labs(w2 - expected2);
    double extreme = 0.0, total = 0.0;
    for (long s = 0; s <= max_sum; ++s) {
      const double count = ways[n1][s];
      if (count == 0.0) continue;
      total += count;
      if (std::labs(s - expected2) >= observed) extreme += count;
    }
    result.p_value = extreme / total;
  } else {
    const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dN = static_cast<double>(N);
    const double var = dn1 * dn2 / 12.0 * ((dN + 1.0) - tie_term / (dN * (dN - 1.0)));
    if (var <= 0.0) {
      result.p_value = 1.0;
    } else {
      const double dev = std::abs(0.5 * static_cast<double>(w2 - expected2));
      const double z = std::max(0.0, dev - 0.5) / std::sqrt(var);
      result.p_value = std::erfc(z / std::sqrt(2.0));
    }
  }
  result.p_value = std::clamp(result.p_value, DBL_MIN, 1.0);
  return result;
}

}  // namespace ckme
