#pragma once

#include <cstdint>
#include <string_view>

namespace ckme {

/// Name recorded in model files for the Gaussian sampler below.
inline constexpr std::string_view kGeneratorName = "splitmix64-counter/box-muller-v1";

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a hash of a purpose tag, used for seed splitting.
constexpr std::uint64_t tag_hash(std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Per-purpose sub-seed: seed XOR hash(tag), remixed. Adding a new purpose
/// never changes the stream of an existing one.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
  return mix64(seed ^ tag_hash(tag));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                    std::uint64_t index) noexcept {
  return mix64(derive_seed(seed, tag) + mix64(index));
}

/// Counter-based generator: the k-th output is mix64(seed + k * golden).
/// Every draw is a pure function of (seed, counter), so streams are
/// reproducible independent of platform and call interleaving.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  constexpr result_type operator()() noexcept {
    return mix64(seed_ + (counter_++) * 0x9e3779b97f4a7c15ULL);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound) via Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Standard normal via the basic Box-Muller transform. Both outputs of a
  /// pair are used; the spare is cached.
  double normal() noexcept;

  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ckme
