#pragma once

// Deterministic, splittable 64-bit generator (splitmix64). All disorder in
// the toolkit is drawn through this so runs are reproducible from a single
// seed, independent of platform and standard-library version.

#include <cstdint>

namespace vat {

struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in the open interval (0,1).
  double next_open01() {
    for (;;) {
      double x = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
      if (x > 0.0) return x;
    }
  }

  /// Derive an independent stream; stream k of a base seed is stable.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 g(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
    return g.next_u64();
  }
};

}  // namespace vat
