#include "ckme/pipeline.hpp"

#include "ckme/embedding.hpp"
#include "ckme/errors.hpp"
#include "ckme/interpret.hpp"
#include "ckme/random.hpp"
#include "ckme/text_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>
#include <optional>
#include <type_traits>
#include <string>

namespace ckme {

std::string_view to_string(Representation r) noexcept { return r == Representation::naive_mean ? "naive_mean" : "ckme"; }

Representation parse_representation(std::string_view text) {
  if (text == "ckme") return Representation::ckme;
  if (text == "naive_mean") return Representation::naive_mean;
  throw ConfigError("representation must be ckme or naive_mean, got '" + std::string(text) + "'");
}

namespace {

template <class T>
T parse_number(std::string_view key, std::string_view value) {
  value = text::trim(value);
  T out{};
  if constexpr (std::is_floating_point_v<T>) {
    double v = 0.0;
    if (!text::parse_double(value, v)) throw ConfigError(std::string(key) + ": not a number: '" + std::string(value) + "'");
    out = static_cast<T>(v);
  } else {
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
      throw ConfigError(std::string(key) + ": not an integer: '" + std::string(value) + "'");
    }
  }
  return out;
}

/// Run `fn(k)` for k in [0, n) in parallel, rethrowing the first failure by index.
template <class Fn>
void parallel_for_each_index(std::size_t n, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < count; ++k) {
    try {
      fn(static_cast<std::size_t>(k));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// Preprocess and sub-select every sample of one run.
std::vector<SampleSet> select_all(const LabeledDataset& data, const PipelineConfig& cfg, const RffMap& map,
                                  const Preprocessing& pre, int run) {
  std::vector<std::optional<SampleSet>> out(data.size());
  parallel_for_each_index(data.size(), [&](std::size_t k) {
    const std::uint64_t seed = derive_seed(cfg.seed, "uniform", static_cast<std::uint64_t>(run) * data.size() + k);
    out[k] = select_cells(map, pre.apply(data.samples[k]), cfg, seed);
  });
  std::vector<SampleSet> sets;
  sets.reserve(out.size());
  for (auto& s : out) sets.push_back(std::move(*s));
  return sets;
}

Matrix represent_all(const RffMap& map, const std::vector<SampleSet>& sets, Representation representation) {
  const Eigen::Index width = representation == Representation::ckme ? map.D() : map.d();
  Matrix X(static_cast<Eigen::Index>(sets.size()), width);
  parallel_for_each_index(sets.size(), [&](std::size_t k) {
    X.row(static_cast<Eigen::Index>(k)) = represent(map, sets[k], representation).transpose();
  });
  return X;
}

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = X.row(static_cast<Eigen::Index>(idx[r]));
  return out;
}

double sample_stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

struct Split {
  std::vector<std::size_t> train, test;
};

Split split_for(const std::vector<int>& fold_of, int fold) {
  Split s;
  for (std::size_t k = 0; k < fold_of.size(); ++k) (fold_of[k] == fold ? s.test : s.train).push_back(k);
  return s;
}

std::vector<int> labels_at(const std::vector<int>& labels, const std::vector<std::size_t>& idx) {
  std::vector<int> out;
  out.reserve(idx.size());
  for (auto k : idx) out.push_back(labels[k]);
  return out;
}

void check_dataset(const LabeledDataset& data, const PipelineConfig& cfg) {
  cfg.validate();
  data.validate();
  if (static_cast<std::size_t>(cfg.folds) > data.size()) {
    throw ConfigError("folds exceeds sample count: folds = " + std::to_string(cfg.folds) + ", N = " +
                      std::to_string(data.size()));
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
  if (D < 2 || D % 2 != 0) throw ConfigError("D must be an even integer >= 2");
  if (m < 0) throw ConfigError("m must be positive or 'all'");
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (runs < 1) throw ConfigError("runs must be positive");
  if (!(reg_c > 0.0) || !std::isfinite(reg_c)) throw ConfigError("reg_c must be positive");
  if (clusters < 2) throw ConfigError("clusters must be at least 2");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (max_iter < 1) throw ConfigError("max_iter must be positive");
  if (kmeans_max_iter < 1) throw ConfigError("kmeans_max_iter must be positive");
  if (herd_cache_mb < 1) throw ConfigError("herd_cache_mb must be positive");
  if (preprocessing.kind == PreprocessKind::arcsinh && !(preprocessing.cofactor > 0.0)) {
    throw ConfigError("cofactor must be positive");
  }
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  value = text::trim(value);
  if (key == "gamma") gamma = parse_number<double>(key, value);
  else if (key == "D") D = parse_number<Eigen::Index>(key, value);
  else if (key == "m") m = value == "all" ? 0 : parse_number<Eigen::Index>(key, value);
  else if (key == "folds") folds = parse_number<int>(key, value);
  else if (key == "runs") runs = parse_number<int>(key, value);
  else if (key == "reg_c") reg_c = parse_number<double>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "subsample") subsample = parse_subsample_method(value);
  else if (key == "preprocessing") preprocessing.kind = parse_preprocess_kind(value);
  else if (key == "cofactor") preprocessing.cofactor = parse_number<double>(key, value);
  else if (key == "clusters") clusters = parse_number<int>(key, value);
  else if (key == "representation") representation = parse_representation(value);
  else if (key == "tol") tol = parse_number<double>(key, value);
  else if (key == "max_iter") max_iter = parse_number<long>(key, value);
  else if (key == "kmeans_max_iter") kmeans_max_iter = parse_number<int>(key, value);
  else if (key == "herd_cache_mb") herd_cache_mb = parse_number<std::size_t>(key, value);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
  if (key == "m" && value != "all" && m == 0) throw ConfigError("m must be positive or 'all'");
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  return {
      {"gamma", text::format_double(gamma)},
      {"D", std::to_string(D)},
      {"m", m == 0 ? std::string("all") : std::to_string(m)},
      {"folds", std::to_string(folds)},
      {"runs", std::to_string(runs)},
      {"reg_c", text::format_double(reg_c)},
      {"seed", std::to_string(seed)},
      {"subsample", std::string(to_string(subsample))},
      {"preprocessing", std::string(to_string(preprocessing.kind))},
      {"cofactor", text::format_double(preprocessing.cofactor)},
      {"clusters", std::to_string(clusters)},
      {"representation", std::string(to_string(representation))},
      {"tol", text::format_double(tol)},
      {"max_iter", std::to_string(max_iter)},
      {"kmeans_max_iter", std::to_string(kmeans_max_iter)},
      {"herd_cache_mb", std::to_string(herd_cache_mb)},
  };
}

void apply_config_file(PipelineConfig& cfg, const std::string& path) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config file " + path);
  }
  int line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    cfg.set(text::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

RffMap run_map(Eigen::Index d, const PipelineConfig& cfg, int run) {
  return RffMap::sample(d, cfg.D, cfg.gamma, derive_seed(cfg.seed, "rff", static_cast<std::uint64_t>(run)));
}

std::vector<Eigen::Index> select_indices(const RffMap& map, const SampleSet& set, const PipelineConfig& cfg,
                                         std::uint64_t seed) {
  // Sets smaller than m are kept whole.
  if (cfg.m == 0 || cfg.m >= set.n()) {
    std::vector<Eigen::Index> all(set.n());
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    return all;
  }
  if (cfg.subsample == SubsampleMethod::uniform) return uniform_subsample(set, cfg.m, seed).selected_indices;
  HerdingOptions options;
  options.cache_bytes = cfg.herd_cache_mb << 20;
  return herd(map, set, cfg.m, options).selected_indices;
}

SampleSet select_cells(const RffMap& map, const SampleSet& set, const PipelineConfig& cfg, std::uint64_t seed) {
  if (cfg.m == 0 || cfg.m >= set.n()) return set;
  return subset(set, {select_indices(map, set, cfg, seed), cfg.subsample});
}

Vector represent(const RffMap& map, const SampleSet& set, Representation representation) {
  if (representation == Representation::naive_mean) return naive_mean(set);
  return mean_embedding(map, set).mu;
}

std::vector<int> stratified_folds(const std::vector<int>& labels, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (static_cast<std::size_t>(folds) > labels.size()) {
    throw ConfigError("folds exceeds sample count: folds = " + std::to_string(folds) + ", N = " +
                      std::to_string(labels.size()));
  }
  std::vector<int> fold_of(labels.size(), -1);
  CounterRng rng(seed);
  int next = 0;
  for (int cls : {-1, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (labels[k] == cls) members.push_back(k);
    }
    if (members.size() < 2) {
      throw DataError("class " + std::to_string(cls) + " has " + std::to_string(members.size()) +
                      " sample(s); every training fold needs both classes");
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.below(i)]);
    }
    for (auto k : members) {
      fold_of[k] = next;
      next = (next + 1) % folds;
    }
  }
  return fold_of;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

CvReport cross_validate(const LabeledDataset& data, const PipelineConfig& cfg) {
  check_dataset(data, cfg);
  CvReport report;
  report.config = cfg;
  const Eigen::Index d = static_cast<Eigen::Index>(data.marker_names.size());
  for (int run = 0; run < cfg.runs; ++run) {
    const RffMap map = run_map(d, cfg, run);
    const auto fold_of = stratified_folds(data.labels, cfg.folds, derive_seed(cfg.seed, "split", run));
    std::optional<Matrix> shared;
    if (!cfg.preprocessing.data_dependent()) {
      shared = represent_all(map, select_all(data, cfg, map, cfg.preprocessing, run), cfg.representation);
    }
    std::vector<double> accuracies;
    for (int fold = 0; fold < cfg.folds; ++fold) {
      const Split split = split_for(fold_of, fold);
      Matrix features;
      if (shared) {
        features = *shared;
      } else {
        Preprocessing pre = cfg.preprocessing;
        std::vector<SampleSet> train_sets;
        for (auto k : split.train) train_sets.push_back(data.samples[k]);
        pre.fit(train_sets);
        features = represent_all(map, select_all(data, cfg, map, pre, run), cfg.representation);
      }
      const LinearFit fit =
          train_linear(take_rows(features, split.train), labels_at(data.labels, split.train), cfg.reg_c, cfg.solver());
      int correct = 0;
      for (auto k : split.test) {
        const double f = features.row(static_cast<Eigen::Index>(k)).dot(fit.beta) + fit.bias;
        if (predicted_label(f) == data.labels[k]) ++correct;
      }
      accuracies.push_back(static_cast<double>(correct) / static_cast<double>(split.test.size()));
    }
    report.run_accuracy.push_back(mean_of(accuracies));
    report.fold_accuracy.push_back(std::move(accuracies));
  }
  report.mean = mean_of(report.run_accuracy);
  report.stddev = sample_stddev(report.run_accuracy);
  return report;
}

LinearModel train_pipeline(const LabeledDataset& data, const PipelineConfig& cfg) {
  cfg.validate();
  data.validate();
  if (cfg.representation != Representation::ckme) {
    throw ConfigError("a trained model requires representation=ckme");
  }
  const Eigen::Index d = static_cast<Eigen::Index>(data.marker_names.size());
  const RffMap map = run_map(d, cfg, 0);
  Preprocessing pre = cfg.preprocessing;
  pre.fit(data.samples);
  const Matrix X = represent_all(map, select_all(data, cfg, map, pre, 0), Representation::ckme);
  LinearFit fit = train_linear(X, data.labels, cfg.reg_c, cfg.solver());
  TrainMeta meta;
  meta.seed = cfg.seed;
  meta.preprocessing = pre;
  meta.subsample = cfg.subsample;
  meta.m = cfg.m;
  meta.label_names = data.label_names;
  meta.marker_names = data.marker_names;
  return LinearModel{map, std::move(fit.beta), fit.bias, cfg.reg_c, std::move(meta)};
}

PreparedSet prepare_for_model(const LinearModel& model, const SampleSet& set) {
  if (set.d() != model.rff.d()) {
    throw DataError("sample '" + set.sample_id() + "' has " + std::to_string(set.d()) + " markers, model expects " +
                    std::to_string(model.rff.d()));
  }
  PipelineConfig cfg;
  cfg.m = model.meta.m;
  cfg.subsample = model.meta.subsample;
  const std::uint64_t seed = derive_seed(model.meta.seed, "predict-uniform", tag_hash(set.sample_id()));
  const SampleSet processed = model.meta.preprocessing.apply(set);
  auto rows = select_indices(model.rff, processed, cfg, seed);
  SampleSet cells = subset(processed, {rows, cfg.subsample});
  return {std::move(cells), std::move(rows)};
}

double predict_set(const LinearModel& model, const SampleSet& set) {
  return decision(model, mean_embedding(model.rff, prepare_for_model(model, set).cells));
}

std::vector<HerdBenchRow> herd_bench(const std::vector<MixtureComponent>& mixture, int n,
                                     const std::vector<Eigen::Index>& ms, int seeds, const PipelineConfig& cfg) {
  if (ms.empty()) throw ConfigError("herd-bench: no m values");
  if (seeds < 1) throw ConfigError("herd-bench: seeds must be positive");
  const Eigen::Index max_m = *std::max_element(ms.begin(), ms.end());
  for (auto m : ms) {
    if (m < 1) throw ConfigError("herd-bench: m must be positive");
    if (m > n) throw ConfigError("herd-bench: m = " + std::to_string(m) + " exceeds n = " + std::to_string(n));
  }
  std::vector<double> herd_err(ms.size(), 0.0), unif_err(ms.size(), 0.0);
  for (int s = 0; s < seeds; ++s) {
    const auto us = static_cast<std::uint64_t>(s);
    const SampleSet set = sample_mixture(mixture, n, derive_seed(cfg.seed, "bench-set", us), "bench");
    const RffMap map = RffMap::sample(set.d(), cfg.D, cfg.gamma, derive_seed(cfg.seed, "bench-rff", us));
    const Vector full = mean_embedding(map, set).mu;
    HerdingOptions options;
    options.cache_bytes = cfg.herd_cache_mb << 20;
    const HerdingResult order = herd(map, set, max_m, options);
    for (std::size_t i = 0; i < ms.size(); ++i) {
      HerdingResult prefix;
      prefix.selected_indices.assign(order.selected_indices.begin(), order.selected_indices.begin() + ms[i]);
      herd_err[i] += (mean_embedding(map, subset(set, prefix)).mu - full).norm();
      const HerdingResult draw =
          uniform_subsample(set, ms[i], derive_seed(cfg.seed, "bench-uniform", us * ms.size() + i));
      unif_err[i] += (mean_embedding(map, subset(set, draw)).mu - full).norm();
    }
  }
  std::vector<HerdBenchRow> rows;
  for (std::size_t i = 0; i < ms.size(); ++i) rows.push_back({SubsampleMethod::herding, ms[i], herd_err[i] / seeds});
  for (std::size_t i = 0; i < ms.size(); ++i) rows.push_back({SubsampleMethod::uniform, ms[i], unif_err[i] / seeds});
  return rows;
}

FrequencyCvReport frequency_predictors_cv(const LabeledDataset& data, const PipelineConfig& cfg) {
  check_dataset(data, cfg);
  FrequencyCvReport report;
  const Eigen::Index d = static_cast<Eigen::Index>(data.marker_names.size());
  for (int run = 0; run < cfg.runs; ++run) {
    const RffMap map = run_map(d, cfg, run);
    const auto fold_of = stratified_folds(data.labels, cfg.folds, derive_seed(cfg.seed, "split", run));
    std::optional<std::vector<SampleSet>> shared;
    if (!cfg.preprocessing.data_dependent()) shared = select_all(data, cfg, map, cfg.preprocessing, run);

    std::vector<double> acc_linear, acc_centroid, acc_average, acc_ckme;
    for (int fold = 0; fold < cfg.folds; ++fold) {
      const Split split = split_for(fold_of, fold);
      std::vector<SampleSet> sets;
      if (shared) {
        sets = *shared;
      } else {
        Preprocessing pre = cfg.preprocessing;
        std::vector<SampleSet> train_sets;
        for (auto k : split.train) train_sets.push_back(data.samples[k]);
        pre.fit(train_sets);
        sets = select_all(data, cfg, map, pre, run);
      }
      const Matrix X = represent_all(map, sets, Representation::ckme);
      const auto train_labels = labels_at(data.labels, split.train);
      LinearFit fit = train_linear(take_rows(X, split.train), train_labels, cfg.reg_c, cfg.solver());
      const LinearModel model{map, std::move(fit.beta), fit.bias, cfg.reg_c, {}};

      Eigen::Index pooled_rows = 0;
      for (auto k : split.train) pooled_rows += sets[k].n();
      Matrix pooled(pooled_rows, d);
      Eigen::Index row = 0;
      for (auto k : split.train) {
        pooled.middleRows(row, sets[k].n()) = sets[k].cells();
        row += sets[k].n();
      }
      const ClusterModel clusters =
          kmeans(pooled, cfg.clusters, derive_seed(cfg.seed, "kmeans", static_cast<std::uint64_t>(run * cfg.folds + fold)),
                 cfg.kmeans_max_iter);
      const auto s_centroid = centroid_scores(model, clusters);
      const auto s_average = average_scores(model, clusters, pooled);

      std::vector<Vector> train_freqs;
      for (auto k : split.train) train_freqs.push_back(cluster_frequencies(sets[k], clusters));
      const FrequencyModel freq_model = train_frequency_model(train_freqs, train_labels, cfg.reg_c, cfg.solver());

      int ok_linear = 0, ok_centroid = 0, ok_average = 0, ok_ckme = 0;
      for (auto k : split.test) {
        const Vector freqs = cluster_frequencies(sets[k], clusters);
        const int y = data.labels[k];
        ok_linear += predicted_label(freq_model.predict(freqs)) == y;
        ok_centroid += predicted_label(frequency_score_predict(freqs, s_centroid)) == y;
        ok_average += predicted_label(frequency_score_predict(freqs, s_average)) == y;
        ok_ckme += predicted_label(decision(model, Vector(X.row(static_cast<Eigen::Index>(k)).transpose()))) == y;
      }
      const double n_test = static_cast<double>(split.test.size());
      acc_linear.push_back(ok_linear / n_test);
      acc_centroid.push_back(ok_centroid / n_test);
      acc_average.push_back(ok_average / n_test);
      acc_ckme.push_back(ok_ckme / n_test);
    }
    report.linear.push_back(mean_of(acc_linear));
    report.centroid.push_back(mean_of(acc_centroid));
    report.average.push_back(mean_of(acc_average));
    report.ckme.push_back(mean_of(acc_ckme));
  }
  return report;
}

}  // namespace ckme
