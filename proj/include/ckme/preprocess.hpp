#pragma once

#include "ckme/core_data.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace ckme {

enum class PreprocessKind { none, standardize, arcsinh };

std::string_view to_string(PreprocessKind kind) noexcept;
PreprocessKind parse_preprocess_kind(std::string_view text);

/// Preprocessing choice plus whatever state it fitted.
struct Preprocessing {
  PreprocessKind kind = PreprocessKind::none;
  double cofactor = 5.0;
  /// Present once fit() ran with kind == standardize.
  std::optional<Standardizer> standardizer;

  /// Fit any data-dependent state on the training sets.
  void fit(const std::vector<SampleSet>& train);
  /// Whether apply() depends on the training data.
  bool data_dependent() const noexcept { return kind == PreprocessKind::standardize; }
  SampleSet apply(const SampleSet& set) const;
};

}  // namespace ckme
