#include "ckme/core_data.hpp"

#include "ckme/errors.hpp"
#include "ckme/kernels.hpp"
#include "ckme/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <set>

namespace ckme {

namespace {

std::vector<std::string_view> lines_of(std::string_view content) {
  std::vector<std::string_view> lines;
  for (auto line : text::split(content, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
  }
  // Trailing blank lines are not rows.
  while (!lines.empty() && text::trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

std::string where(const std::filesystem::path& path) { return " (" + path.string() + ")"; }

}  // namespace

SampleSet::SampleSet(std::string sample_id, std::vector<std::string> marker_names, Matrix cells)
    : sample_id_(std::move(sample_id)), markers_(std::move(marker_names)), cells_(std::move(cells)) {
  if (cells_.rows() < 1) throw DataError("sample-set '" + sample_id_ + "' has no cells");
  if (cells_.cols() < 1) throw DataError("sample-set '" + sample_id_ + "' has no markers");
  if (static_cast<Eigen::Index>(markers_.size()) != cells_.cols()) {
    throw DataError("sample-set '" + sample_id_ + "': marker name count does not match column count");
  }
}

void LabeledDataset::validate() const {
  if (samples.size() < 2) throw DataError("N >= 2 required: dataset has " + std::to_string(samples.size()) + " sample(s)");
  if (labels.size() != samples.size()) throw DataError("label count does not match sample count");
  bool neg = false, pos = false;
  for (int y : labels) {
    if (y == -1) neg = true;
    else if (y == 1) pos = true;
    else throw DataError("labels must be -1 or +1");
  }
  if (!neg || !pos) throw DataError("both labels must be present");
  for (const auto& s : samples) {
    if (s.marker_names() != marker_names) {
      throw DataError("sample '" + s.sample_id() + "' has a different marker panel");
    }
  }
}

SampleSet load_sample_set(const std::filesystem::path& path,
                          const std::optional<std::vector<std::string>>& expected_markers,
                          std::string sample_id) {
  if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
  const std::string content = text::read_file(path);
  const auto lines = lines_of(content);
  if (lines.empty()) throw DataError("empty file" + where(path));

  std::vector<std::string> header;
  for (auto f : text::split(lines[0], ',')) header.emplace_back(text::trim(f));
  const auto d = static_cast<Eigen::Index>(header.size());
  {
    std::set<std::string> unique(header.begin(), header.end());
    if (unique.size() != header.size()) throw DataError("duplicate marker name in header" + where(path));
    if (unique.count("")) throw DataError("empty marker name in header" + where(path));
  }

  // Column permutation: output column k reads input column source[k].
  std::vector<Eigen::Index> source(d);
  std::vector<std::string> markers = header;
  for (Eigen::Index k = 0; k < d; ++k) source[k] = k;
  if (expected_markers) {
    const auto& want = *expected_markers;
    if (want.size() != header.size()) {
      throw DataError("marker mismatch: expected " + std::to_string(want.size()) + " markers, found " +
                      std::to_string(header.size()) + where(path));
    }
    for (std::size_t k = 0; k < want.size(); ++k) {
      const auto it = std::find(header.begin(), header.end(), want[k]);
      if (it == header.end()) throw DataError("marker mismatch: '" + want[k] + "' not found" + where(path));
      source[k] = it - header.begin();
    }
    markers = want;
  }

  const auto n = static_cast<Eigen::Index>(lines.size()) - 1;
  if (n < 1) throw DataError("no cell rows" + where(path));
  Matrix cells(n, d);
  std::vector<double> row(d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto fields = text::split(lines[r + 1], ',');
    if (static_cast<Eigen::Index>(fields.size()) != d) {
      throw DataError("row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                      " fields, expected " + std::to_string(d) + where(path));
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      double v = 0.0;
      if (!text::parse_double(fields[c], v) || !std::isfinite(v)) {
        throw DataError("non-numeric value at row " + std::to_string(r + 1) + ", column " +
                        std::to_string(c + 1) + where(path));
      }
      row[c] = v;
    }
    for (Eigen::Index k = 0; k < d; ++k) cells(r, k) = row[source[k]];
  }
  if (sample_id.empty()) sample_id = path.stem().string();
  return SampleSet(std::move(sample_id), std::move(markers), std::move(cells));
}

std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("missing file: " + path.string());
  const std::string content = text::read_file(path);
  const auto lines = lines_of(content);
  if (lines.empty()) throw DataError("empty manifest" + where(path));
  if (text::trim(lines[0]) != "sample_id,path,label") {
    throw DataError("manifest header must be exactly 'sample_id,path,label'" + where(path));
  }
  std::vector<ManifestEntry> entries;
  const auto base = path.parent_path();
  for (std::size_t r = 1; r < lines.size(); ++r) {
    if (text::trim(lines[r]).empty()) continue;
    const auto fields = text::split(lines[r], ',');
    if (fields.size() != 3) {
      throw DataError("manifest row " + std::to_string(r) + " must have 3 fields" + where(path));
    }
    ManifestEntry e{std::string(text::trim(fields[0])), std::filesystem::path(std::string(text::trim(fields[1]))),
                    std::string(text::trim(fields[2]))};
    if (e.sample_id.empty() || e.label.empty() || e.path.empty()) {
      throw DataError("manifest row " + std::to_string(r) + " has an empty field" + where(path));
    }
    if (e.path.is_relative()) e.path = base / e.path;
    entries.push_back(std::move(e));
  }
  return entries;
}

LabeledDataset load_manifest(const std::filesystem::path& path) {
  const auto entries = read_manifest_entries(path);
  if (entries.size() < 2) {
    throw DataError("N >= 2 required: manifest lists " + std::to_string(entries.size()) + " sample(s)" + where(path));
  }

  std::set<std::string> distinct;
  for (const auto& e : entries) distinct.insert(e.label);
  if (distinct.size() != 2) {
    throw DataError("exactly two label values required, found " + std::to_string(distinct.size()) + where(path));
  }

  LabeledDataset data;
  data.label_names = {*distinct.begin(), *std::next(distinct.begin())};
  for (const auto& e : entries) data.labels.push_back(e.label == data.label_names[0] ? -1 : 1);

  // The first sample fixes the panel; the rest are loaded against it.
  std::vector<std::optional<SampleSet>> loaded(entries.size());
  loaded[0] = load_sample_set(entries[0].path, std::nullopt, entries[0].sample_id);
  data.marker_names = loaded[0]->marker_names();
  std::vector<std::exception_ptr> errors(entries.size());
  const auto count = static_cast<long>(entries.size());
#pragma omp parallel for schedule(dynamic)
  for (long i = 1; i < count; ++i) {
    try {
      loaded[i] = load_sample_set(entries[i].path, data.marker_names, entries[i].sample_id);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
  for (auto& s : loaded) data.samples.push_back(std::move(*s));
  data.validate();
  return data;
}

void write_sample_set(const SampleSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  text::write_row(out, set.marker_names());
  std::vector<std::string> fields(set.d());
  for (Eigen::Index r = 0; r < set.n(); ++r) {
    for (Eigen::Index c = 0; c < set.d(); ++c) fields[c] = text::format_double(set.cells()(r, c));
    text::write_row(out, fields);
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Standardizer fit_standardizer(const std::vector<SampleSet>& train) {
  if (train.empty()) throw DataError("fit_standardizer: no training sets");
  const auto d = train.front().d();
  Eigen::Index total = 0;
  std::vector<kernels::CompensatedSum> sums(d);
  for (const auto& s : train) {
    if (s.d() != d) throw DataError("fit_standardizer: dimension mismatch");
    for (Eigen::Index r = 0; r < s.n(); ++r)
      for (Eigen::Index c = 0; c < d; ++c) sums[c].add(s.cells()(r, c));
    total += s.n();
  }
  Standardizer st{Vector(d), Vector(d)};
  for (Eigen::Index c = 0; c < d; ++c) st.mean[c] = sums[c].value() / static_cast<double>(total);

  std::vector<kernels::CompensatedSum> sq(d);
  for (const auto& s : train)
    for (Eigen::Index r = 0; r < s.n(); ++r)
      for (Eigen::Index c = 0; c < d; ++c) {
        const double dev = s.cells()(r, c) - st.mean[c];
        sq[c].add(dev * dev);
      }
  for (Eigen::Index c = 0; c < d; ++c) {
    const double sd = std::sqrt(sq[c].value() / static_cast<double>(total));
    // Rounding in the mean can leave a constant column with a residue of a few ulps.
    const bool constant = sd <= 1e-12 * std::max(1.0, std::abs(st.mean[c]));
    st.stddev[c] = constant ? 1.0 : sd;
  }
  return st;
}

SampleSet apply_standardizer(const Standardizer& st, const SampleSet& set) {
  if (st.mean.size() != set.d() || st.stddev.size() != set.d()) {
    throw DataError("standardizer dimension " + std::to_string(st.mean.size()) + " does not match set dimension " +
                    std::to_string(set.d()));
  }
  Matrix out = set.cells();
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = (out(r, c) - st.mean[c]) / st.stddev[c];
  return SampleSet(set.sample_id(), set.marker_names(), std::move(out));
}

SampleSet invert_standardizer(const Standardizer& st, const SampleSet& set) {
  if (st.mean.size() != set.d()) throw DataError("standardizer dimension mismatch");
  Matrix out = set.cells();
  for (Eigen::Index r = 0; r < out.rows(); ++r)
    for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = out(r, c) * st.stddev[c] + st.mean[c];
  return SampleSet(set.sample_id(), set.marker_names(), std::move(out));
}

SampleSet arcsinh_transform(const SampleSet& set, double cofactor) {
  if (!(cofactor > 0.0) || !std::isfinite(cofactor)) {
    throw ConfigError("arcsinh cofactor must be positive");
  }
  Matrix out = set.cells().unaryExpr([cofactor](double v) { return std::asinh(v / cofactor); });
  return SampleSet(set.sample_id(), set.marker_names(), std::move(out));
}

}  // namespace ckme
