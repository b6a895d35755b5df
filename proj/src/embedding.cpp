#include "ckme/embedding.hpp"

#include "ckme/errors.hpp"
#include "ckme/kernels.hpp"

namespace ckme {

MeanEmbedding mean_embedding(const RffMap& map, const SampleSet& set) {
  if (set.d() != map.d()) {
    throw DataError("sample '" + set.sample_id() + "' has " + std::to_string(set.d()) + " markers, map expects " +
                    std::to_string(map.d()));
  }
  return {kernels::feature_mean(map, set.cells()), set.n(), set.sample_id()};
}

CellVector naive_mean(const SampleSet& set) { return kernels::column_mean(set.cells()); }

double mmd(const RffMap& map, const SampleSet& a, const SampleSet& b) {
  return (mean_embedding(map, a).mu - mean_embedding(map, b).mu).norm();
}

}  // namespace ckme
