#include "ckme/synth.hpp"

#include "ckme/errors.hpp"
#include "ckme/random.hpp"
#include "ckme/text_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace ckme {

namespace {

Vector parse_list(std::string_view text, const std::string& what) {
  const auto fields = text::split(text, ',');
  Vector v(static_cast<Eigen::Index>(fields.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (!text::parse_double(fields[i], v[static_cast<Eigen::Index>(i)])) {
      throw ConfigError("synthetic spec: bad number in " + what);
    }
  }
  return v;
}

template <class T>
T parse_int(std::string_view key, std::string_view value) {
  value = text::trim(value);
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    throw ConfigError("synthetic spec: " + std::string(key) + " is not an integer");
  }
  return out;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (dim < 1) throw ConfigError("synthetic spec: dim must be positive");
  if (sets_per_class < 1) throw ConfigError("synthetic spec: sets_per_class must be positive");
  if (cells_per_set < 1) throw ConfigError("synthetic spec: cells_per_set must be positive");
  if (labels[0].empty() || labels[1].empty() || labels[0] == labels[1]) {
    throw ConfigError("synthetic spec: exactly two distinct class labels required");
  }
  for (int c = 0; c < 2; ++c) {
    const auto& mix = mixtures[c];
    if (mix.empty()) throw ConfigError("synthetic spec: class '" + labels[c] + "' has no components");
    double total = 0.0;
    for (const auto& comp : mix) {
      if (comp.mean.size() != dim || comp.variance.size() != dim) {
        throw ConfigError("synthetic spec: component of '" + labels[c] + "' does not have dim entries");
      }
      if (!comp.mean.allFinite()) throw ConfigError("synthetic spec: non-finite component mean");
      if (!(comp.variance.array() > 0.0).all() || !comp.variance.allFinite()) {
        throw ConfigError("synthetic spec: invalid covariance: variances must be positive for class '" + labels[c] + "'");
      }
      if (!(comp.weight >= 0.0)) throw ConfigError("synthetic spec: bad simplex: negative weight");
      total += comp.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("synthetic spec: bad simplex: weights of class '" + labels[c] + "' sum to " +
                        text::format_double(total));
    }
  }
}

SyntheticSpec parse_synthetic_spec(const std::string& content) {
  SyntheticSpec spec;
  spec.labels = {"", ""};
  int line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("synthetic spec line " + std::to_string(line_no) + ": expected key=value");
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    if (key == "dim") spec.dim = parse_int<int>(key, value);
    else if (key == "sets_per_class") spec.sets_per_class = parse_int<int>(key, value);
    else if (key == "cells_per_set") spec.cells_per_set = parse_int<int>(key, value);
    else if (key == "seed") spec.seed = parse_int<std::uint64_t>(key, value);
    else if (key.starts_with("component.")) {
      const std::string label(key.substr(10));
      int slot = -1;
      for (int c = 0; c < 2; ++c) {
        if (spec.labels[c] == label) slot = c;
      }
      if (slot < 0) {
        if (spec.labels[0].empty()) slot = 0;
        else if (spec.labels[1].empty()) slot = 1;
        else throw ConfigError("synthetic spec: more than two class labels");
        spec.labels[slot] = label;
      }
      const auto parts = text::split(value, '|');
      if (parts.size() != 3) throw ConfigError("synthetic spec line " + std::to_string(line_no) + ": expected mean|variance|weight");
      MixtureComponent comp;
      comp.mean = parse_list(parts[0], "mean");
      comp.variance = parse_list(parts[1], "variance");
      const Vector w = parse_list(parts[2], "weight");
      if (w.size() != 1) throw ConfigError("synthetic spec: weight must be a single number");
      comp.weight = w[0];
      spec.mixtures[slot].push_back(std::move(comp));
    } else {
      throw ConfigError("synthetic spec: unknown key '" + std::string(key) + "'");
    }
  }
  spec.validate();
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read synthetic spec " + path.string());
  }
  return parse_synthetic_spec(content);
}

SyntheticSpec mixture_weight_benchmark(int sets_per_class, int cells_per_set, std::uint64_t seed, double weight,
                                       double separation) {
  SyntheticSpec spec;
  spec.dim = 2;
  spec.sets_per_class = sets_per_class;
  spec.cells_per_set = cells_per_set;
  spec.seed = seed;
  spec.labels = {"pos", "neg"};
  const Vector a = Vector::Zero(2);
  Vector b = Vector::Zero(2);
  b[0] = separation;
  const Vector unit = Vector::Ones(2);
  spec.mixtures[0] = {{a, unit, weight}, {b, unit, 1.0 - weight}};
  spec.mixtures[1] = {{a, unit, 1.0 - weight}, {b, unit, weight}};
  spec.validate();
  return spec;
}

SyntheticSpec variance_contrast_benchmark(int sets_per_class, int cells_per_set, std::uint64_t seed,
                                          double variance_pos, double variance_neg) {
  SyntheticSpec spec;
  spec.dim = 2;
  spec.sets_per_class = sets_per_class;
  spec.cells_per_set = cells_per_set;
  spec.seed = seed;
  spec.labels = {"pos", "neg"};
  const Vector a = Vector::Zero(2);
  Vector b = Vector::Zero(2);
  b[0] = 4.0;
  const Vector vp = Vector::Constant(2, variance_pos);
  const Vector vn = Vector::Constant(2, variance_neg);
  spec.mixtures[0] = {{a, vp, 0.5}, {b, vp, 0.5}};
  spec.mixtures[1] = {{a, vn, 0.5}, {b, vn, 0.5}};
  spec.validate();
  return spec;
}

SampleSet sample_mixture(const std::vector<MixtureComponent>& mixture, int n, std::uint64_t seed, std::string sample_id) {
  if (mixture.empty() || n < 1) throw ConfigError("sample_mixture: empty mixture or n < 1");
  const Eigen::Index d = mixture.front().mean.size();
  std::vector<Vector> sd;
  for (const auto& c : mixture) sd.push_back(c.variance.cwiseSqrt());
  CounterRng rng(seed);
  Matrix cells(n, d);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    std::size_t pick = mixture.size() - 1;
    double cum = 0.0;
    for (std::size_t c = 0; c < mixture.size(); ++c) {
      cum += mixture[c].weight;
      if (u < cum) {
        pick = c;
        break;
      }
    }
    for (Eigen::Index k = 0; k < d; ++k) cells(i, k) = mixture[pick].mean[k] + sd[pick][k] * rng.normal();
  }
  std::vector<std::string> markers;
  for (Eigen::Index k = 0; k < d; ++k) markers.push_back("m" + std::to_string(k + 1));
  return SampleSet(std::move(sample_id), std::move(markers), std::move(cells));
}

LabeledDataset generate(const SyntheticSpec& spec) {
  spec.validate();
  LabeledDataset data;
  data.label_names = spec.labels;
  if (data.label_names[1] < data.label_names[0]) std::swap(data.label_names[0], data.label_names[1]);
  for (int c = 0; c < 2; ++c) {
    const int label = spec.labels[c] == data.label_names[0] ? -1 : 1;
    for (int k = 0; k < spec.sets_per_class; ++k) {
      const std::uint64_t seed = derive_seed(spec.seed, "synth", static_cast<std::uint64_t>(c * spec.sets_per_class + k));
      data.samples.push_back(
          sample_mixture(spec.mixtures[c], spec.cells_per_set, seed, spec.labels[c] + "_" + std::to_string(k)));
      data.labels.push_back(label);
    }
  }
  data.marker_names = data.samples.front().marker_names();
  data.validate();
  return data;
}

std::filesystem::path write_dataset(const LabeledDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "samples");
  const auto manifest = dir / "manifest.csv";
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw DataError("cannot write " + manifest.string());
  out << "sample_id,path,label\n";
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto& s = data.samples[k];
    const std::string rel = "samples/" + s.sample_id() + ".csv";
    write_sample_set(s, dir / rel);
    out << s.sample_id() << ',' << rel << ',' << data.label_names[label_slot(data.labels[k])] << '\n';
  }
  if (!out) throw DataError("write failed: " + manifest.string());
  return manifest;
}

}  // namespace ckme
