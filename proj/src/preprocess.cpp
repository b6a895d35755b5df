#include "ckme/preprocess.hpp"

#include "ckme/errors.hpp"

#include <string>

namespace ckme {

std::string_view to_string(PreprocessKind kind) noexcept {
  switch (kind) {
    case PreprocessKind::standardize: return "standardize";
    case PreprocessKind::arcsinh: return "arcsinh";
    case PreprocessKind::none: break;
  }
  return "none";
}

PreprocessKind parse_preprocess_kind(std::string_view text) {
  if (text == "none") return PreprocessKind::none;
  if (text == "standardize") return PreprocessKind::standardize;
  if (text == "arcsinh") return PreprocessKind::arcsinh;
  throw ConfigError("preprocessing must be none, standardize or arcsinh, got '" + std::string(text) + "'");
}

void Preprocessing::fit(const std::vector<SampleSet>& train) {
  if (kind == PreprocessKind::standardize) standardizer = fit_standardizer(train);
}

SampleSet Preprocessing::apply(const SampleSet& set) const {
  switch (kind) {
    case PreprocessKind::none:
      return set;
    case PreprocessKind::arcsinh:
      return arcsinh_transform(set, cofactor);
    case PreprocessKind::standardize:
      if (!standardizer) throw ConfigError("standardizer used before fit");
      return apply_standardizer(*standardizer, set);
  }
  return set;
}

}  // namespace ckme
