#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "proofmatch/corpus.hpp"

namespace proofmatch {

struct SynthOptions {
  std::size_t pairs = 0;
  std::size_t vocab_size = 500;
  double overlap = 0.5;
  std::int64_t seed = 0;
  std::size_t markers_per_pair = 8;
};

// Synthetic matching corpus. Half of the vocabulary is math "marker" tokens
// (m:italic:k<i>), the rest word "background" tokens (w:t<i>). Every pair
// carries its own combination of markers in both statement and proof (no
// two pairs share a combination while enough remain); the remaining
// positions are background words. Statements draw background from the
// first (1 + overlap) / 2 of the background list and proofs from the last
// (1 + overlap) / 2, so overlap = 0 leaves the markers as the only shared
// tokens. Statements hold 20-30 tokens, proofs 24-40. Deterministic per seed.
// Throws DataError when overlap is outside [0, 1] or the vocabulary is too
// small for the marker count.
std::vector<StatementProofPair> synthesize(const SynthOptions& options);

}  // namespace proofmatch
