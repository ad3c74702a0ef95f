// SplitMix64: the project-wide deterministic generator.
#pragma once

#include <cstdint>

namespace cfstune {

/// Steele, Lea & Flood's SplitMix64. Chosen because its output is fully
/// specified by the 64-bit seed, so traces reproduce across platforms and
/// languages.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
};

/// Seed of the `index`-th independent substream of `master`.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 mix(master ^ (0xD1B54A32D192ED03ULL * (index + 1)));
  return mix.next();
}

}  // namespace cfstune
