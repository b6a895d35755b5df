#pragma once

#include "ckme/core_data.hpp"
#include "ckme/random.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace ckme::test {

inline SampleSet make_set(std::vector<std::vector<double>> rows, std::string id = "s") {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto d = static_cast<Eigen::Index>(rows.front().size());
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = rows[i][k];
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < d; ++k) names.push_back("m" + std::to_string(k + 1));
  return SampleSet(std::move(id), names, std::move(m));
}

inline Matrix gaussian_cells(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double shift = 0.0,
                             double sd = 1.0) {
  CounterRng rng(seed);
  Matrix m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < d; ++k) m(i, k) = shift + sd * rng.normal();
  return m;
}

inline SampleSet gaussian_set(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double shift = 0.0,
                              std::string id = "g") {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < d; ++k) names.push_back("m" + std::to_string(k + 1));
  return SampleSet(std::move(id), names, gaussian_cells(n, d, seed, shift));
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& name) {
    path_ = std::filesystem::temp_directory_path() / ("ckme_test_" + name);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace ckme::test
