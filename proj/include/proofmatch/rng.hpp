#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace proofmatch {

// xoshiro256** (Blackman & Vigna), seeded by expanding a 64-bit seed with
// splitmix64. All derived draws are defined here rather than through
// <random> distributions so that streams are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();

  // Uniform integer in [0, bound). Uses rejection on the top of the
  // 64-bit range to avoid modulo bias. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  // Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  // Fisher-Yates, iterating i from size-1 down to 1 with j = below(i + 1).
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace proofmatch
