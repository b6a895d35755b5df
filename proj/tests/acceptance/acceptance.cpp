// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include "cli.hpp"

#include "ckme/classifier.hpp"
#include "ckme/embedding.hpp"
#include "ckme/interpret.hpp"
#include "ckme/kernels.hpp"
#include "ckme/pipeline.hpp"
#include "ckme/random.hpp"
#include "ckme/rff.hpp"
#include "ckme/synth.hpp"
#include "ckme/text_io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace ckme;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail, double seconds) {
  if (!pass) ++failures;
  std::printf("%s [%2d] %s: %s (%.1f s)\n", pass ? "PASS" : "FAIL", id, what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs the command-line tool in-process with its chatter discarded.
int tool(std::vector<std::string> args) {
  args.insert(args.begin(), "ckme");
  std::ostringstream sink;
  auto* old = std::cout.rdbuf(sink.rdbuf());
  const int code = cli::run(args);
  std::cout.rdbuf(old);
  return code;
}

Vector random_vector(CounterRng& rng, Eigen::Index n, double sd = 1.0) {
  Vector v(n);
  for (auto& x : v) x = sd * rng.normal();
  return v;
}

LinearModel random_model(CounterRng& rng, Eigen::Index d, Eigen::Index D) {
  TrainMeta meta;
  for (Eigen::Index k = 0; k < d; ++k) meta.marker_names.push_back("m" + std::to_string(k + 1));
  const double gamma = 0.25 + 4.0 * rng.uniform();
  return LinearModel{RffMap::sample(d, D, gamma, rng()), random_vector(rng, D), rng.normal(), 1.0, meta};
}

SampleSet random_set(CounterRng& rng, Eigen::Index n, Eigen::Index d) {
  Matrix cells(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) cells(i, k) = 2.0 * rng.normal() + 1.0;
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < d; ++k) names.push_back("m" + std::to_string(k + 1));
  return SampleSet("r", names, cells);
}

PipelineConfig fixture_config() {
  PipelineConfig cfg;
  cfg.gamma = 1.0;
  cfg.D = 2000;
  cfg.m = 200;
  cfg.folds = 5;
  cfg.runs = 5;
  cfg.reg_c = 1.0;
  cfg.seed = 3;
  return cfg;
}

std::vector<std::string> config_flags(const PipelineConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& [k, v] : cfg.entries()) {
    std::string flag = "--" + k;
    std::replace(flag.begin(), flag.end(), '_', '-');
    out.push_back(flag);
    out.push_back(v);
  }
  return out;
}

double two_sided_enumeration(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const int N = static_cast<int>(pooled.size()), n1 = static_cast<int>(a.size());
  std::vector<double> rank(N);
  for (int i = 0; i < N; ++i) {
    int less = 0, equal = 0;
    for (int j = 0; j < N; ++j) {
      less += pooled[j] < pooled[i];
      equal += pooled[j] == pooled[i];
    }
    rank[i] = less + (equal + 1) / 2.0;
  }
  const double centre = n1 * (N + 1) / 2.0;
  double w = 0.0;
  for (int i = 0; i < n1; ++i) w += rank[i];
  const double dev = std::abs(w - centre);
  long extreme = 0, total = 0;
  for (unsigned mask = 0; mask < (1u << N); ++mask) {
    if (__builtin_popcount(mask) != n1) continue;
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      if (mask >> i & 1u) s += rank[i];
    ++total;
    extreme += std::abs(s - centre) >= dev - 1e-9;
  }
  return static_cast<double>(extreme) / static_cast<double>(total);
}

// ---------------------------------------------------------------------------

void kernel_approximation() {
  const auto t0 = Clock::now();
  const RffMap map = RffMap::sample(10, 2000, 1.0, 101);
  CounterRng rng(102);
  double worst = 0.0, total = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Vector x = random_vector(rng, 10);
    const Vector y = x + random_vector(rng, 10).normalized() * (3.0 * rng.uniform());
    const double err = std::abs(map.featurize(x).dot(map.featurize(y)) - kernel_exact(x, y, 1.0));
    worst = std::max(worst, err);
    total += err;
  }
  const double secs = since(t0);
  const double mean = total / 1000.0;
  report(1, worst <= 0.1 && mean <= 0.02 && secs < 5.0, "kernel approximation",
         "max " + num(worst) + " (<= 0.1), mean " + num(mean) + " (<= 0.02)", secs);
}

void herding_decay(const SyntheticSpec& spec) {
  const auto t0 = Clock::now();
  PipelineConfig cfg = fixture_config();
  const std::vector<Eigen::Index> ms{25, 50, 100, 200};
  const auto rows = herd_bench(spec.mixtures[0], 2000, ms, 20, cfg);
  std::vector<double> herd(ms.size()), unif(ms.size());
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(std::find(ms.begin(), ms.end(), r.m) - ms.begin());
    (r.method == SubsampleMethod::herding ? herd : unif)[i] = r.error;
  }
  auto slope = [&](const std::vector<double>& e) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const double x = std::log(static_cast<double>(ms[i])), y = std::log(e[i]);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  };
  bool dominates = true;
  std::string errors;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    dominates = dominates && herd[i] < unif[i];
    errors += " m=" + std::to_string(ms[i]) + ":" + num(herd[i], 3) + "/" + num(unif[i], 3);
  }
  const double hs = slope(herd);
  const double ratio = herd[1] / herd[3];
  const bool saturates = std::abs(herd[1] - herd[3]) <= 0.1 * herd[3];
  const double secs = since(t0);
  report(2, dominates && hs <= -0.8 && saturates && secs < 120.0, "herding dominance and decay",
         std::string("herding<uniform ") + (dominates ? "yes" : "no") + ";" + errors + "; herding slope " + num(hs, 3) +
             " (<= -0.8); uniform slope " + num(slope(unif), 3) + "; err(50)/err(200) = " + num(ratio, 3) +
             " (needs <= 1.1)",
         secs);
}

double fixture_accuracy(const fs::path& work, const PipelineConfig& cfg) {
  const auto t0 = Clock::now();
  const fs::path data = work / "benchmark";
  bool ok = tool({"synth", "--spec", std::string(CKME_FIXTURE_DIR) + "/benchmark.spec", "--out", data.string()}) == 0;
  auto args = config_flags(cfg);
  args.insert(args.begin(), {"crossval", "--manifest", (data / "manifest.csv").string(), "--out", (work / "cv1").string()});
  ok = ok && tool(args) == 0;
  const LabeledDataset dataset = load_manifest(data / "manifest.csv");
  CvReport cv;
  {
    // Mean accuracy is read back from the report the tool wrote.
    std::istringstream in(slurp(work / "cv1/cv_report.csv"));
    std::string line;
    double sum = 0.0;
    int n = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line.rfind("run,", 0) == 0) continue;
      sum += std::stod(line.substr(line.rfind(',') + 1));
      ++n;
    }
    cv.mean = n ? sum / n : 0.0;
  }

  LabeledDataset permuted = dataset;
  CounterRng rng(2024);
  std::shuffle(permuted.labels.begin(), permuted.labels.end(), rng);
  const CvReport control = cross_validate(permuted, cfg);
  const double secs = since(t0);
  report(3, ok && cv.mean >= 0.90 && control.mean >= 0.35 && control.mean <= 0.65 && secs < 300.0,
         "end-to-end fixture accuracy",
         "mean " + num(cv.mean) + " (>= 0.90); permuted-label control " + num(control.mean) + " in [0.35, 0.65]", secs);
  return cv.mean;
}

void ablation_directions(const PipelineConfig& base) {
  const auto t0 = Clock::now();
  const LabeledDataset data = generate(load_synthetic_spec(std::string(CKME_FIXTURE_DIR) + "/variance_contrast.spec"));
  PipelineConfig cfg = base;
  const double herding = cross_validate(data, cfg).mean;
  cfg.subsample = SubsampleMethod::uniform;
  const double uniform = cross_validate(data, cfg).mean;
  cfg.subsample = SubsampleMethod::herding;
  cfg.representation = Representation::naive_mean;
  const double naive = cross_validate(data, cfg).mean;
  report(4, naive <= 0.65 && herding >= 0.85 && uniform <= herding, "ablation directions",
         "naive mean " + num(naive) + " (<= 0.65), CKME herding " + num(herding) + " (>= 0.85), uniform " +
             num(uniform) + " (<= herding)",
         since(t0));
}

void decomposition() {
  const auto t0 = Clock::now();
  CounterRng rng(505);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index D = 2 * (1 + static_cast<Eigen::Index>(rng.below(500)));
    const LinearModel model = random_model(rng, d, D);
    const SampleSet set = random_set(rng, 1 + static_cast<Eigen::Index>(rng.below(800)), d);
    const double f = decision(model, mean_embedding(model.rff, set));
    const auto scores = cell_scores(model, set.cells());
    kernels::CompensatedSum s;
    for (double v : scores) s.add(v);
    const double mean = s.value() / static_cast<double>(scores.size());
    worst = std::max(worst, std::abs(f - mean) / (1.0 + std::abs(f)));
  }
  report(5, worst <= 1e-9, "decision equals mean cell score",
         "max |f - mean score| / (1 + |f|) = " + num(worst, 3) + " (<= 1e-9)", since(t0));
}

void gradient_check() {
  const auto t0 = Clock::now();
  CounterRng rng(606);
  const double h = 1e-6;
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(8));
    const LinearModel model = random_model(rng, d, 2 * (1 + static_cast<Eigen::Index>(rng.below(400))));
    const Vector x = random_vector(rng, d);
    const Vector g = score_gradient(model, x);
    Vector fd(d);
    for (Eigen::Index k = 0; k < d; ++k) {
      Vector xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      fd[k] = (cell_score(model, xp) - cell_score(model, xm)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), 1e-300));
  }
  report(6, worst <= 1e-5, "score gradient vs central differences",
         "max relative error " + num(worst, 3) + " (<= 1e-5)", since(t0));
}

void permutation_invariance(const LinearModel& model, const LabeledDataset& data) {
  const auto t0 = Clock::now();
  CounterRng rng(707);
  double worst = 0.0;
  int flips = 0;
  for (int t = 0; t < 50; ++t) {
    const SampleSet& set = data.samples[t % data.size()];
    std::vector<Eigen::Index> perm(set.n());
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    const SampleSet shuffled = subset(set, {perm, SubsampleMethod::uniform});
    worst = std::max(worst, (mean_embedding(model.rff, shuffled).mu - mean_embedding(model.rff, set).mu)
                                .cwiseAbs()
                                .maxCoeff());
    flips += predicted_label(predict_set(model, shuffled)) != predicted_label(predict_set(model, set));
  }
  report(7, worst <= 1e-9 && flips == 0, "permutation invariance",
         "max embedding change " + num(worst, 3) + " (<= 1e-9), label changes " + std::to_string(flips) + "/50",
         since(t0));
}

void semantic_retention(const fs::path& work, const PipelineConfig& cfg) {
  const auto t0 = Clock::now();
  const std::string manifest = (work / "benchmark/manifest.csv").string();
  std::string values;
  bool ok = true;
  for (int seed = 0; seed < 5; ++seed) {
    PipelineConfig run = cfg;
    run.seed = static_cast<std::uint64_t>(seed);
    run.clusters = 10;
    const fs::path dir = work / ("interpret_" + std::to_string(seed));
    const std::string model = (dir / "model.txt").string();
    auto train_args = config_flags(run);
    train_args.insert(train_args.begin(), {"train", "--manifest", manifest, "--model", model, "--out", dir.string()});
    auto interpret_args = config_flags(run);
    interpret_args.insert(interpret_args.begin(),
                          {"interpret", "--manifest", manifest, "--model", model, "--out", dir.string()});
    if (tool(train_args) != 0 || tool(interpret_args) != 0) {
      ok = false;
      values += " seed " + std::to_string(seed) + ": tool error";
      continue;
    }
    std::istringstream in(slurp(dir / "interpret_summary.txt"));
    std::string line, r = "missing";
    while (std::getline(in, line))
      if (line.rfind("pearson_centroid_vs_average=", 0) == 0) r = line.substr(line.find('=') + 1);
    double v = 0.0;
    const bool numeric = text::parse_double(r, v);
    ok = ok && numeric && v >= 0.5;
    values += " " + (numeric ? num(v) : r);
  }
  report(8, ok, "semantic retention, C = 10",
         "Pearson(centroid, average) per seed:" + values + " (each >= 0.5)", since(t0));
}

void frequency_predictors(const LabeledDataset& data, const PipelineConfig& base) {
  const auto t0 = Clock::now();
  PipelineConfig cfg = base;
  cfg.clusters = 10;
  const FrequencyCvReport r = frequency_predictors_cv(data, cfg);
  const double lin = mean_of(r.linear), cen = mean_of(r.centroid), avg = mean_of(r.average);
  const bool ok = std::abs(cen - lin) <= 0.10 && std::abs(avg - lin) <= 0.10 && lin >= 0.70 && cen >= 0.70 &&
                  avg >= 0.70;
  report(9, ok, "frequency predictors",
         "linear " + num(lin) + ", centroid " + num(cen) + ", average " + num(avg) + ", CKME " + num(mean_of(r.ckme)) +
             " (within 0.10 of linear, all >= 0.70)",
         since(t0));
}

void rank_sum_oracle() {
  const auto t0 = Clock::now();
  long cases = 0, mismatches = 0, approx_used = 0;
  CounterRng rng(909);
  for (int N = 2; N <= 10; ++N) {
    for (int n1 = 1; n1 < N; ++n1) {
      // Small N: every labelling over a 3-letter alphabet. Larger N: random draws over a coarse grid.
      const long exhaustive = N <= 7 ? static_cast<long>(std::pow(3, N)) : 0;
      const long trials = exhaustive ? exhaustive : 400;
      for (long t = 0; t < trials; ++t) {
        std::vector<double> a, b;
        long code = t;
        for (int i = 0; i < N; ++i) {
          double v;
          if (exhaustive) {
            v = static_cast<double>(code % 3);
            code /= 3;
          } else {
            v = t % 2 ? static_cast<double>(rng.below(4)) : rng.uniform();
          }
          (i < n1 ? a : b).push_back(v);
        }
        const RankSumResult r = rank_sum_test(a, b);
        ++cases;
        approx_used += !r.exact;
        mismatches += r.p_value != two_sided_enumeration(a, b);
      }
    }
  }
  int ok_seeds = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    CounterRng g(derive_seed(99, "ranksum", s));
    std::vector<double> a(50), b(50);
    for (auto& v : a) v = g.normal();
    for (auto& v : b) v = g.normal();
    ok_seeds += rank_sum_test(a, b).p_value >= 0.01;
  }
  report(10, mismatches == 0 && approx_used == 0 && ok_seeds >= 98, "rank-sum oracle equivalence",
         std::to_string(cases) + " small inputs, " + std::to_string(mismatches) + " p-value mismatches, " +
             std::to_string(approx_used) + " normal-branch uses; null n=50: p >= 0.01 in " + std::to_string(ok_seeds) +
             "/100 (>= 98)",
         since(t0));
}

void determinism(const fs::path& work, const PipelineConfig& cfg) {
  const auto t0 = Clock::now();
  auto args = config_flags(cfg);
  args.insert(args.begin(),
              {"crossval", "--manifest", (work / "benchmark/manifest.csv").string(), "--out", (work / "cv2").string()});
  const bool ran = tool(args) == 0;
  const std::string a = slurp(work / "cv1/cv_report.csv");
  const std::string b = slurp(work / "cv2/cv_report.csv");
  report(11, ran && !a.empty() && a == b, "crossval determinism",
         std::string("reports ") + (a == b ? "byte-identical" : "differ") + " (" + std::to_string(a.size()) + " bytes)",
         since(t0));
}

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "ckme_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const PipelineConfig cfg = fixture_config();
  const SyntheticSpec spec = load_synthetic_spec(std::string(CKME_FIXTURE_DIR) + "/benchmark.spec");

  try {
    kernel_approximation();
    herding_decay(spec);
    fixture_accuracy(work, cfg);
    ablation_directions(cfg);
    decomposition();
    gradient_check();
    const LabeledDataset data = load_manifest(work / "benchmark/manifest.csv");
    permutation_invariance(train_pipeline(data, cfg), data);
    semantic_retention(work, cfg);
    frequency_predictors(data, cfg);
    rank_sum_oracle();
    determinism(work, cfg);
  } catch (const std::exception& e) {
    std::printf("FAIL acceptance run aborted: %s\n", e.what());
    ++failures;
  }
  std::printf("%d criteria failed\n", failures);
  fs::remove_all(work);
  return failures;
}
