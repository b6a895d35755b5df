#pragma once

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ckme {

/// Row-major so that one cell is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
/// Marker expression of a single cell (length d).
using CellVector = Eigen::VectorXd;

/// One biological sample: n cells by d markers. Row order carries no meaning.
class SampleSet {
 public:
  SampleSet(std::string sample_id, std::vector<std::string> marker_names, Matrix cells);

  const std::string& sample_id() const noexcept { return sample_id_; }
  const std::vector<std::string>& marker_names() const noexcept { return markers_; }
  const Matrix& cells() const noexcept { return cells_; }
  Eigen::Index n() const noexcept { return cells_.rows(); }
  Eigen::Index d() const noexcept { return cells_.cols(); }
  CellVector cell(Eigen::Index i) const { return cells_.row(i).transpose(); }

 private:
  std::string sample_id_;
  std::vector<std::string> markers_;
  Matrix cells_;
};

/// N labeled sample-sets sharing one marker panel. Labels are -1/+1.
struct LabeledDataset {
  std::vector<SampleSet> samples;
  std::vector<int> labels;
  std::vector<std::string> marker_names;
  /// label_names[0] maps to -1, label_names[1] to +1.
  std::array<std::string, 2> label_names;

  std::size_t size() const noexcept { return samples.size(); }
  /// Throws DataError unless N >= 2, both labels present and panels agree.
  void validate() const;
};

/// Per-feature affine normalization.
struct Standardizer {
  Vector mean;
  Vector stddev;
};

/// Parse a cell table. If expected_markers is given the columns are permuted
/// into that order; a differing marker set is an error.
SampleSet load_sample_set(const std::filesystem::path& path,
                          const std::optional<std::vector<std::string>>& expected_markers = std::nullopt,
                          std::string sample_id = {});

/// One manifest row with its path resolved against the manifest directory.
struct ManifestEntry {
  std::string sample_id;
  std::filesystem::path path;
  std::string label;
};

/// Rows of a manifest without loading the referenced files.
std::vector<ManifestEntry> read_manifest_entries(const std::filesystem::path& path);

/// Parse "sample_id,path,label". The lexicographically smaller label string maps to -1.
LabeledDataset load_manifest(const std::filesystem::path& path);

/// Write a cell table with 17 significant digits (reloads bit-identically).
void write_sample_set(const SampleSet& set, const std::filesystem::path& path);

Standardizer fit_standardizer(const std::vector<SampleSet>& train);
SampleSet apply_standardizer(const Standardizer& std, const SampleSet& set);
/// x * stddev + mean, elementwise.
SampleSet invert_standardizer(const Standardizer& std, const SampleSet& set);

/// asinh(v / cofactor) on every entry.
SampleSet arcsinh_transform(const SampleSet& set, double cofactor);

/// Map labels -1/+1 to 0/1 for indexing label_names.
inline std::size_t label_slot(int label) noexcept { return label > 0 ? 1 : 0; }

}  // namespace ckme
