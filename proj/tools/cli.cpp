#include "cli.hpp"

#include "ckme/classifier.hpp"
#include "ckme/embedding.hpp"
#include "ckme/errors.hpp"
#include "ckme/herding.hpp"
#include "ckme/interpret.hpp"
#include "ckme/pipeline.hpp"
#include "ckme/random.hpp"
#include "ckme/synth.hpp"
#include "ckme/text_io.hpp"

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ckme::cli {

namespace {

namespace fs = std::filesystem;

constexpr const char* kVersion = "1.0.0";

/// Config keys that have a mirrored --flag, in PipelineConfig::entries() order.
const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : PipelineConfig{}.entries()) out.push_back(k);
    return out;
  }();
  return keys;
}

std::string flag_for(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

struct Globals {
  std::string config_path;
  std::string out_dir = ".";
  int threads = 0;
  std::map<std::string, std::string> overrides;
};

PipelineConfig effective_config(const Globals& g) {
  PipelineConfig cfg;
  if (!g.config_path.empty()) apply_config_file(cfg, g.config_path);
  for (const auto& key : config_keys()) {
    if (auto it = g.overrides.find(key); it != g.overrides.end()) cfg.set(key, it->second);
  }
  cfg.validate();
  return cfg;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_config_header(std::ostream& os, const PipelineConfig& cfg) {
  for (const auto& [k, v] : cfg.entries()) os << "# " << k << '=' << v << '\n';
}

void write_meta(const fs::path& out_dir, const std::string& command, const PipelineConfig& cfg,
                const std::vector<std::pair<std::string, std::string>>& extra = {}) {
  auto out = open_out(out_dir / "meta.txt");
  out << "command=" << command << '\n';
  out << "ckme_version=" << kVersion << '\n';
  out << "generator=" << kGeneratorName << '\n';
  out << "model_format_version=" << kModelVersion << '\n';
  for (const auto& [k, v] : cfg.entries()) out << k << '=' << v << '\n';
  for (const auto& [k, v] : extra) out << k << '=' << v << '\n';
}

std::string fmt(double v) { return text::format_double(v); }

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (auto f : text::split(text, ',')) {
    double v = 0.0;
    if (!text::parse_double(f, v)) throw ConfigError(what + ": bad number '" + std::string(f) + "'");
    out.push_back(v);
  }
  return out;
}

SyntheticSpec resolve_spec(const std::string& spec_path, const std::string& preset) {
  if (!spec_path.empty() && !preset.empty()) throw ConfigError("give either --spec or --preset, not both");
  if (!spec_path.empty()) return load_synthetic_spec(spec_path);
  if (preset == "benchmark") return mixture_weight_benchmark(40, 1000, 1);
  if (preset == "variance-contrast") return variance_contrast_benchmark(40, 1000, 2, 1.0, 0.8);
  if (preset == "null") {
    SyntheticSpec spec = mixture_weight_benchmark(40, 1000, 3);
    spec.mixtures[1] = spec.mixtures[0];
    return spec;
  }
  if (preset.empty()) throw ConfigError("synth: --spec or --preset is required");
  throw ConfigError("unknown preset '" + preset + "' (benchmark, variance-contrast, null)");
}

/// Samples of a manifest loaded against the model's marker panel.
std::vector<SampleSet> load_for_model(const fs::path& manifest, const LinearModel& model,
                                      std::vector<std::string>* labels = nullptr) {
  std::vector<SampleSet> sets;
  for (const auto& e : read_manifest_entries(manifest)) {
    sets.push_back(load_sample_set(e.path, model.meta.marker_names, e.sample_id));
    if (labels) labels->push_back(e.label);
  }
  return sets;
}

// ---------------------------------------------------------------------------

int cmd_synth(const Globals& g, const std::string& spec_path, const std::string& preset) {
  const SyntheticSpec spec = resolve_spec(spec_path, preset);
  const LabeledDataset data = generate(spec);
  const fs::path manifest = write_dataset(data, g.out_dir);
  write_meta(g.out_dir, "synth", effective_config(g),
             {{"spec_seed", std::to_string(spec.seed)},
              {"sets_per_class", std::to_string(spec.sets_per_class)},
              {"cells_per_set", std::to_string(spec.cells_per_set)}});
  std::cout << "wrote " << data.size() << " samples; manifest " << manifest.string() << '\n';
  return kExitOk;
}

int cmd_featurize(const Globals& g, const std::string& manifest) {
  const PipelineConfig cfg = effective_config(g);
  const LabeledDataset data = load_manifest(manifest);
  const RffMap map = run_map(static_cast<Eigen::Index>(data.marker_names.size()), cfg, 0);
  Preprocessing pre = cfg.preprocessing;
  pre.fit(data.samples);

  std::vector<Vector> rows(data.size());
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto seed = derive_seed(cfg.seed, "uniform", k);
    rows[k] = represent(map, select_cells(map, pre.apply(data.samples[k]), cfg, seed), cfg.representation);
  }
  auto out = open_out(fs::path(g.out_dir) / "embeddings.csv");
  out << "sample_id";
  for (Eigen::Index j = 0; j < rows.front().size(); ++j) out << ",e" << j;
  out << '\n';
  for (std::size_t k = 0; k < data.size(); ++k) {
    out << data.samples[k].sample_id();
    for (Eigen::Index j = 0; j < rows[k].size(); ++j) out << ',' << fmt(rows[k][j]);
    out << '\n';
  }
  write_meta(g.out_dir, "featurize", cfg);
  std::cout << "embedded " << data.size() << " samples\n";
  return kExitOk;
}

int cmd_herd(const Globals& g, const std::string& manifest) {
  const PipelineConfig cfg = effective_config(g);
  const LabeledDataset data = load_manifest(manifest);
  const RffMap map = run_map(static_cast<Eigen::Index>(data.marker_names.size()), cfg, 0);
  Preprocessing pre = cfg.preprocessing;
  pre.fit(data.samples);

  const fs::path dir = fs::path(g.out_dir) / "herded";
  fs::create_directories(dir);
  auto index_out = open_out(fs::path(g.out_dir) / "herd_indices.csv");
  index_out << "sample_id,order,row_index\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& raw = data.samples[k];
    const auto rows = select_indices(map, pre.apply(raw), cfg, derive_seed(cfg.seed, "uniform", k));
    write_sample_set(subset(raw, {rows, cfg.subsample}), dir / (raw.sample_id() + ".csv"));
    for (std::size_t r = 0; r < rows.size(); ++r) index_out << raw.sample_id() << ',' << r << ',' << rows[r] << '\n';
  }
  write_meta(g.out_dir, "herd", cfg);
  std::cout << "sub-selected " << data.size() << " samples\n";
  return kExitOk;
}

int cmd_herd_bench(const Globals& g, const std::string& spec_path, const std::string& preset, const std::string& ms_text,
                   int seeds) {
  const PipelineConfig cfg = effective_config(g);
  const SyntheticSpec spec = resolve_spec(spec_path, preset.empty() && spec_path.empty() ? "benchmark" : preset);
  std::vector<Eigen::Index> ms;
  for (double v : parse_list(ms_text, "--ms")) {
    if (v != std::floor(v)) throw ConfigError("--ms: values must be integers");
    ms.push_back(static_cast<Eigen::Index>(v));
  }
  const auto rows = herd_bench(spec.mixtures[0], spec.cells_per_set, ms, seeds, cfg);
  auto out = open_out(fs::path(g.out_dir) / "herd_bench.csv");
  write_config_header(out, cfg);
  out << "method,m,error\n";
  for (const auto& r : rows) out << to_string(r.method) << ',' << r.m << ',' << fmt(r.error) << '\n';
  write_meta(g.out_dir, "herd-bench", cfg, {{"bench_seeds", std::to_string(seeds)}});
  for (const auto& r : rows) std::cout << to_string(r.method) << " m=" << r.m << " error=" << fmt(r.error) << '\n';
  return kExitOk;
}

int cmd_train(const Globals& g, const std::string& manifest, std::string model_path) {
  const PipelineConfig cfg = effective_config(g);
  const LabeledDataset data = load_manifest(manifest);
  const LinearModel model = train_pipeline(data, cfg);
  if (model_path.empty()) model_path = (fs::path(g.out_dir) / "model.txt").string();
  if (fs::path(model_path).has_parent_path()) fs::create_directories(fs::path(model_path).parent_path());
  save_model(model, model_path);
  int correct = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    correct += predicted_label(predict_set(model, data.samples[k])) == data.labels[k];
  }
  write_meta(g.out_dir, "train", cfg);
  std::cout << "model written to " << model_path << "; training accuracy "
            << percent(static_cast<double>(correct) / static_cast<double>(data.size())) << "%\n";
  return kExitOk;
}

int cmd_predict(const Globals& g, const std::string& manifest, const std::vector<std::string>& samples,
                const std::string& model_path) {
  const PipelineConfig cfg = effective_config(g);
  const LinearModel model = load_model(model_path);
  std::vector<SampleSet> sets;
  if (!manifest.empty()) sets = load_for_model(manifest, model);
  for (const auto& p : samples) sets.push_back(load_sample_set(p, model.meta.marker_names));
  if (sets.empty()) throw ConfigError("predict: give --manifest or at least one --sample");

  auto out = open_out(fs::path(g.out_dir) / "predictions.csv");
  out << "sample_id,decision,label\n";
  for (const auto& s : sets) {
    const double f = predict_set(model, s);
    out << s.sample_id() << ',' << fmt(f) << ',' << model.meta.label_names[label_slot(predicted_label(f))] << '\n';
  }
  write_meta(g.out_dir, "predict", cfg, {{"model", model_path}});
  std::cout << "predicted " << sets.size() << " samples\n";
  return kExitOk;
}

int cmd_crossval(const Globals& g, const std::string& manifest, const std::string& grid_gamma,
                 const std::string& grid_reg_c) {
  PipelineConfig cfg = effective_config(g);
  const LabeledDataset data = load_manifest(manifest);
  if (static_cast<std::size_t>(cfg.folds) > data.size()) {
    throw ConfigError("folds exceeds sample count: folds = " + std::to_string(cfg.folds) + ", N = " +
                      std::to_string(data.size()));
  }

  if (!grid_gamma.empty() || !grid_reg_c.empty()) {
    const auto gammas = grid_gamma.empty() ? std::vector<double>{cfg.gamma} : parse_list(grid_gamma, "--grid-gamma");
    const auto regs = grid_reg_c.empty() ? std::vector<double>{cfg.reg_c} : parse_list(grid_reg_c, "--grid-reg-c");
    auto sweep = open_out(fs::path(g.out_dir) / "cv_sweep.csv");
    write_config_header(sweep, cfg);
    sweep << "gamma,reg_c,mean_accuracy,std_accuracy\n";
    double best = -1.0;
    PipelineConfig best_cfg = cfg;
    for (double gamma : gammas) {
      for (double reg : regs) {
        PipelineConfig trial = cfg;
        trial.gamma = gamma;
        trial.reg_c = reg;
        trial.validate();
        const CvReport r = cross_validate(data, trial);
        sweep << fmt(gamma) << ',' << fmt(reg) << ',' << fmt(r.mean) << ',' << fmt(r.stddev) << '\n';
        std::cout << "gamma=" << fmt(gamma) << " reg_c=" << fmt(reg) << ": " << percent(r.mean) << " ± "
                  << percent(r.stddev) << '\n';
        if (r.mean > best) {
          best = r.mean;
          best_cfg = trial;
        }
      }
    }
    cfg = best_cfg;
  }

  const CvReport report = cross_validate(data, cfg);
  auto out = open_out(fs::path(g.out_dir) / "cv_report.csv");
  write_config_header(out, cfg);
  out << "run,fold,accuracy\n";
  for (std::size_t r = 0; r < report.fold_accuracy.size(); ++r)
    for (std::size_t f = 0; f < report.fold_accuracy[r].size(); ++f)
      out << r << ',' << f << ',' << fmt(report.fold_accuracy[r][f]) << '\n';
  const std::string summary = percent(report.mean) + " ± " + percent(report.stddev);
  out << "# summary=" << summary << '\n';
  write_meta(g.out_dir, "crossval", cfg);
  std::cout << summary << '\n';
  return kExitOk;
}

int cmd_interpret(const Globals& g, const std::string& manifest, const std::string& model_path) {
  const PipelineConfig cfg = effective_config(g);
  const LinearModel model = load_model(model_path);
  std::vector<std::string> label_text;
  const auto raw = load_for_model(manifest, model, &label_text);
  std::vector<int> labels;
  for (const auto& l : label_text) {
    if (l == model.meta.label_names[0]) labels.push_back(-1);
    else if (l == model.meta.label_names[1]) labels.push_back(1);
    else throw DataError("label '" + l + "' is not one of the model's labels");
  }

  std::vector<PreparedSet> prepared;
  Eigen::Index total = 0;
  for (const auto& s : raw) {
    prepared.push_back(prepare_for_model(model, s));
    total += prepared.back().cells.n();
  }
  Matrix pooled(total, model.rff.d());
  Eigen::Index row = 0;
  for (const auto& p : prepared) {
    pooled.middleRows(row, p.cells.n()) = p.cells.cells();
    row += p.cells.n();
  }
  const ClusterModel clusters = kmeans(pooled, cfg.clusters, derive_seed(cfg.seed, "kmeans"), cfg.kmeans_max_iter);
  const auto scores = cell_scores(model, pooled);
  const auto s_centroid = centroid_scores(model, clusters);
  const auto s_average = average_scores(model, clusters, pooled);
  const fs::path dir = g.out_dir;
  const auto& markers = model.meta.marker_names;

  {
    auto out = open_out(dir / "scores.csv");
    out << "sample_id,cell_index,score,cluster_id\n";
    Eigen::Index i = 0;
    for (const auto& p : prepared)
      for (auto r : p.rows) {
        out << p.cells.sample_id() << ',' << r << ',' << fmt(scores[i]) << ',' << clusters.assignments[i] << '\n';
        ++i;
      }
  }

  std::vector<Vector> gradients;
  for (int c = 0; c < clusters.C(); ++c) gradients.push_back(score_gradient(model, clusters.centroids.row(c).transpose()));
  {
    auto out = open_out(dir / "clusters.csv");
    write_config_header(out, cfg);
    out << "cluster_id,size,centroid_score,average_score";
    for (const auto& m : markers) out << ",centroid_" << m;
    for (const auto& m : markers) out << ",gradient_" << m;
    out << '\n';
    std::vector<Eigen::Index> sizes(clusters.C(), 0);
    for (int a : clusters.assignments) ++sizes[a];
    for (int c = 0; c < clusters.C(); ++c) {
      out << c << ',' << sizes[c] << ',' << fmt(s_centroid[c]) << ',' << fmt(s_average[c]);
      for (Eigen::Index k = 0; k < clusters.centroids.cols(); ++k) out << ',' << fmt(clusters.centroids(c, k));
      for (Eigen::Index k = 0; k < gradients[c].size(); ++k) out << ',' << fmt(gradients[c][k]);
      out << '\n';
    }
  }
  {
    // Markers ranked by gradient magnitude within each cluster.
    auto out = open_out(dir / "gradients.csv");
    out << "cluster_id,rank,marker,gradient\n";
    for (int c = 0; c < clusters.C(); ++c) {
      std::vector<Eigen::Index> order(gradients[c].size());
      for (Eigen::Index k = 0; k < gradients[c].size(); ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return std::abs(gradients[c][a]) > std::abs(gradients[c][b]);
      });
      for (std::size_t r = 0; r < order.size(); ++r)
        out << c << ',' << r << ',' << markers[order[r]] << ',' << fmt(gradients[c][order[r]]) << '\n';
    }
  }

  std::vector<Vector> freqs;
  for (const auto& p : prepared) freqs.push_back(cluster_frequencies(p.cells, clusters));
  {
    auto out = open_out(dir / "frequencies.csv");
    out << "sample_id,label";
    for (int c = 0; c < clusters.C(); ++c) out << ",freq_" << c;
    out << '\n';
    for (std::size_t k = 0; k < prepared.size(); ++k) {
      out << prepared[k].cells.sample_id() << ',' << label_text[k];
      for (int c = 0; c < clusters.C(); ++c) out << ',' << fmt(freqs[k][c]);
      out << '\n';
    }
  }
  {
    auto out = open_out(dir / "cluster_stats.csv");
    write_config_header(out, cfg);
    out << "cluster_id,n_" << model.meta.label_names[0] << ",n_" << model.meta.label_names[1]
        << ",statistic,p_value,method\n";
    for (int c = 0; c < clusters.C(); ++c) {
      std::vector<double> neg, pos;
      for (std::size_t k = 0; k < freqs.size(); ++k) (labels[k] < 0 ? neg : pos).push_back(freqs[k][c]);
      if (neg.empty() || pos.empty()) throw DataError("interpret: rank-sum test needs samples of both labels");
      const RankSumResult t = rank_sum_test(neg, pos);
      out << c << ',' << neg.size() << ',' << pos.size() << ',' << fmt(t.statistic) << ',' << fmt(t.p_value) << ','
          << (t.exact ? "exact" : "normal") << '\n';
    }
  }

  std::string pearson_text;
  try {
    pearson_text = fmt(pearson(s_centroid, s_average));
  } catch (const NumericalError&) {
    pearson_text = "n/a: zero variance";
  }
  {
    auto out = open_out(dir / "interpret_summary.txt");
    out << "clusters=" << clusters.C() << '\n';
    out << "kmeans_inertia=" << fmt(clusters.inertia) << '\n';
    out << "kmeans_space=" << to_string(model.meta.preprocessing.kind) << '\n';
    out << "pearson_centroid_vs_average=" << pearson_text << '\n';
  }
  write_meta(g.out_dir, "interpret", cfg, {{"model", model_path}});
  std::cout << "pearson(centroid, average) = " << pearson_text << '\n';
  return kExitOk;
}

int cmd_stats(const Globals& g, std::string freq_path, int cluster) {
  const PipelineConfig cfg = effective_config(g);
  if (freq_path.empty()) freq_path = (fs::path(g.out_dir) / "frequencies.csv").string();
  const std::string content = text::read_file(freq_path);
  auto lines = text::split(content, '\n');
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw DataError("empty frequency file " + freq_path);
  const auto header = text::split(text::trim(lines[0]), ',');
  const std::string column = "freq_" + std::to_string(cluster);
  const auto col = std::find(header.begin(), header.end(), column);
  if (header.size() < 3 || header[0] != "sample_id" || header[1] != "label") {
    throw DataError(freq_path + ": expected header sample_id,label,freq_0,...");
  }
  if (col == header.end()) throw ConfigError("cluster " + std::to_string(cluster) + " not present in " + freq_path);
  const auto idx = static_cast<std::size_t>(col - header.begin());

  std::map<std::string, std::vector<double>> groups;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = text::split(text::trim(lines[r]), ',');
    if (fields.size() != header.size()) throw DataError(freq_path + ": row " + std::to_string(r) + " has wrong field count");
    double v = 0.0;
    if (!text::parse_double(fields[idx], v)) throw DataError(freq_path + ": bad number in row " + std::to_string(r));
    groups[std::string(fields[1])].push_back(v);
  }
  if (groups.size() != 2) throw DataError("stats: exactly two labels required, found " + std::to_string(groups.size()));
  const auto& [name_a, a] = *groups.begin();
  const auto& [name_b, b] = *std::next(groups.begin());
  const RankSumResult t = rank_sum_test(a, b);
  auto out = open_out(fs::path(g.out_dir) / "stats.csv");
  write_config_header(out, cfg);
  out << "cluster_id,label_a,n_a,label_b,n_b,statistic,p_value,method\n";
  out << cluster << ',' << name_a << ',' << a.size() << ',' << name_b << ',' << b.size() << ',' << fmt(t.statistic)
      << ',' << fmt(t.p_value) << ',' << (t.exact ? "exact" : "normal") << '\n';
  write_meta(g.out_dir, "stats", cfg, {{"frequencies", freq_path}, {"cluster", std::to_string(cluster)}});
  std::cout << "cluster " << cluster << ": rank-sum p = " << fmt(t.p_value) << " (" << (t.exact ? "exact" : "normal")
            << ")\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Set-level classification of single-cell samples with kernel mean embeddings"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "key=value config file; flags override it");
  app.add_option("--threads", g.threads, "OpenMP threads (0 = runtime default)");
  app.add_option("--out", g.out_dir, "Output directory");
  for (const auto& key : config_keys()) {
    app.add_option_function<std::string>(
        flag_for(key), [&g, key](const std::string& v) { g.overrides[key] = v; }, "Override config key '" + key + "'");
  }

  std::string manifest, spec_path, preset, model_path, ms_text = "16,25,32,50,64,100,128,200,256";
  std::string grid_gamma, grid_reg_c, freq_path;
  std::vector<std::string> samples;
  int bench_seeds = 20;
  int cluster = 0;

  auto* synth = app.add_subcommand("synth", "Generate a Gaussian-mixture benchmark dataset");
  synth->add_option("--spec", spec_path, "Synthetic spec file");
  synth->add_option("--preset", preset, "benchmark | variance-contrast | null");

  auto* featurize = app.add_subcommand("featurize", "Write one mean embedding per sample");
  featurize->add_option("--manifest", manifest)->required();

  auto* herd_cmd = app.add_subcommand("herd", "Sub-select cells of every sample");
  herd_cmd->add_option("--manifest", manifest)->required();

  auto* bench = app.add_subcommand("herd-bench", "Embedding error of herding vs uniform sub-sampling");
  bench->add_option("--spec", spec_path, "Synthetic spec; the first class's mixture is used");
  bench->add_option("--preset", preset, "benchmark | variance-contrast | null");
  bench->add_option("--ms", ms_text, "Comma-separated m values");
  bench->add_option("--bench-seeds", bench_seeds, "Seeds averaged per m");

  auto* train_cmd = app.add_subcommand("train", "Train on a manifest and write a model file");
  train_cmd->add_option("--manifest", manifest)->required();
  train_cmd->add_option("--model", model_path, "Model path (default OUT/model.txt)");

  auto* predict = app.add_subcommand("predict", "Score samples with a trained model");
  predict->add_option("--model", model_path)->required();
  predict->add_option("--manifest", manifest);
  predict->add_option("--sample", samples, "Sample CSV (repeatable)");

  auto* crossval = app.add_subcommand("crossval", "Repeated stratified K-fold cross-validation");
  crossval->add_option("--manifest", manifest)->required();
  crossval->add_option("--grid-gamma", grid_gamma, "Comma-separated gamma values to sweep");
  crossval->add_option("--grid-reg-c", grid_reg_c, "Comma-separated reg_c values to sweep");

  auto* interpret = app.add_subcommand("interpret", "Cell scores, clusters, gradients and rank-sum tests");
  interpret->add_option("--manifest", manifest)->required();
  interpret->add_option("--model", model_path)->required();

  auto* stats = app.add_subcommand("stats", "Rank-sum test on one cluster's per-sample frequencies");
  stats->add_option("--frequencies", freq_path, "frequencies.csv from interpret (default OUT/frequencies.csv)");
  stats->add_option("--cluster", cluster)->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (g.threads > 0) omp_set_num_threads(g.threads);
    if (g.threads < 0) throw ConfigError("--threads must be non-negative");
    if (*synth) return cmd_synth(g, spec_path, preset);
    if (*featurize) return cmd_featurize(g, manifest);
    if (*herd_cmd) return cmd_herd(g, manifest);
    if (*bench) return cmd_herd_bench(g, spec_path, preset, ms_text, bench_seeds);
    if (*train_cmd) return cmd_train(g, manifest, model_path);
    if (*predict) return cmd_predict(g, manifest, samples, model_path);
    if (*crossval) return cmd_crossval(g, manifest, grid_gamma, grid_reg_c);
    if (*interpret) return cmd_interpret(g, manifest, model_path);
    if (*stats) return cmd_stats(g, freq_path, cluster);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const NumericalError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace ckme::cli
