// Parallel kernels against their serial references.

#include "ckme/herding.hpp"
#include "ckme/kernels.hpp"
#include "ckme/random.hpp"
#include "ckme/rff.hpp"

#include <benchmark/benchmark.h>

#include <vector>

namespace {

using namespace ckme;

Matrix cells(Eigen::Index n, Eigen::Index d) {
  CounterRng rng(1);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = rng.normal();
  return m;
}

SampleSet sample(Eigen::Index n, Eigen::Index d) {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < d; ++k) names.push_back("m" + std::to_string(k));
  return SampleSet("bench", names, cells(n, d));
}

const RffMap& map2000() {
  static const RffMap map = RffMap::sample(10, 2000, 1.0, 7);
  return map;
}

void BM_featurize_parallel(benchmark::State& state) {
  const Matrix x = cells(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::featurize_rows(map2000(), x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_featurize_serial(benchmark::State& state) {
  const Matrix x = cells(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::featurize_rows(map2000(), x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_column_mean_parallel(benchmark::State& state) {
  const Matrix phi = kernels::featurize_rows(map2000(), cells(state.range(0), 10));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::column_mean(phi));
}

void BM_column_mean_serial(benchmark::State& state) {
  const Matrix phi = kernels::featurize_rows(map2000(), cells(state.range(0), 10));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::serial::column_mean(phi));
}

void BM_row_dot_parallel(benchmark::State& state) {
  const Matrix phi = kernels::featurize_rows(map2000(), cells(state.range(0), 10));
  const Vector v = Vector::Ones(2000);
  std::vector<double> out(phi.rows());
  for (auto _ : state) {
    kernels::row_dot(phi, v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_row_dot_serial(benchmark::State& state) {
  const Matrix phi = kernels::featurize_rows(map2000(), cells(state.range(0), 10));
  const Vector v = Vector::Ones(2000);
  std::vector<double> out(phi.rows());
  for (auto _ : state) {
    kernels::serial::row_dot(phi, v, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_nearest_center_parallel(benchmark::State& state) {
  const Matrix x = cells(state.range(0), 10);
  const Matrix c = cells(10, 10);
  std::vector<int> assign(x.rows());
  std::vector<double> d2(x.rows());
  for (auto _ : state) {
    kernels::nearest_center(x, c, assign, d2);
    benchmark::DoNotOptimize(d2.data());
  }
}

void BM_nearest_center_serial(benchmark::State& state) {
  const Matrix x = cells(state.range(0), 10);
  const Matrix c = cells(10, 10);
  std::vector<int> assign(x.rows());
  std::vector<double> d2(x.rows());
  for (auto _ : state) {
    kernels::serial::nearest_center(x, c, assign, d2);
    benchmark::DoNotOptimize(d2.data());
  }
}

void BM_herd_parallel(benchmark::State& state) {
  const SampleSet s = sample(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(herd(map2000(), s, 200));
}

void BM_herd_serial(benchmark::State& state) {
  const SampleSet s = sample(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(herd_serial(map2000(), s, 200));
}

BENCHMARK(BM_featurize_parallel)->Arg(1000)->Arg(10000);
BENCHMARK(BM_featurize_serial)->Arg(1000)->Arg(10000);
BENCHMARK(BM_column_mean_parallel)->Arg(10000);
BENCHMARK(BM_column_mean_serial)->Arg(10000);
BENCHMARK(BM_row_dot_parallel)->Arg(10000);
BENCHMARK(BM_row_dot_serial)->Arg(10000);
BENCHMARK(BM_nearest_center_parallel)->Arg(100000);
BENCHMARK(BM_nearest_center_serial)->Arg(100000);
BENCHMARK(BM_herd_parallel)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_herd_serial)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
