#pragma once

#include "ckme/core_data.hpp"
#include "ckme/rff.hpp"

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace ckme {

enum class SubsampleMethod { herding, uniform };

std::string_view to_string(SubsampleMethod method) noexcept;
SubsampleMethod parse_subsample_method(std::string_view text);

struct HerdingResult {
  /// Distinct row indices into the parent set, in selection order.
  std::vector<Eigen::Index> selected_indices;
  SubsampleMethod method = SubsampleMethod::herding;

  std::size_t m() const noexcept { return selected_indices.size(); }
};

struct HerdingOptions {
  /// Feature cache budget. When n * D doubles exceed it, features are
  /// recomputed chunk by chunk on every iteration instead.
  std::size_t cache_bytes = std::size_t{1} << 30;
};

/// Greedy kernel herding without replacement:
///   theta_0 = mean phi; theta = theta_0
///   repeat m times: i* = argmax_{i unselected} theta . phi(x_i)  (lowest index on ties)
///                   theta += theta_0 - phi(x_i*)
/// The first k entries of herd(.., m) equal herd(.., k) for every k <= m.
HerdingResult herd(const RffMap& map, const SampleSet& set, Eigen::Index m,
                   const HerdingOptions& options = {});

/// Single-threaded reference of herd() that always caches features.
HerdingResult herd_serial(const RffMap& map, const SampleSet& set, Eigen::Index m);

/// m distinct indices uniformly without replacement (partial Fisher-Yates).
HerdingResult uniform_subsample(const SampleSet& set, Eigen::Index m, std::uint64_t seed);

/// The selected cells, in selection order, with the same sample_id.
SampleSet subset(const SampleSet& set, const HerdingResult& result);

}  // namespace ckme
