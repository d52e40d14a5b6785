#include "proofmatch/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "proofmatch/error.hpp"
#include "proofmatch/rng.hpp"

namespace proofmatch {

namespace {

constexpr std::size_t kStatementMin = 12, kStatementMax = 20;
constexpr std::size_t kProofMin = 16, kProofMax = 28;
constexpr int kUniqueAttempts = 64;

std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

}  // namespace

std::vector<StatementProofPair> synthesize(const SynthOptions& options) {
  if (!(options.overlap >= 0.0 && options.overlap <= 1.0)) {
    throw DataError("overlap must lie in [0, 1]");
  }
  const std::size_t markers = options.vocab_size / 2;
  const std::size_t background = options.vocab_size - markers;
  if (options.markers_per_pair == 0 || markers < options.markers_per_pair || background < 2) {
    throw DataError("vocabulary too small for the synthetic layout");
  }

  const auto pool_size = static_cast<std::size_t>(
      std::ceil(static_cast<double>(background) * (1.0 + options.overlap) / 2.0));
  const std::size_t statement_hi = std::max<std::size_t>(1, std::min(pool_size, background));
  const std::size_t proof_lo = background - statement_hi;

  Rng rng(static_cast<std::uint64_t>(options.seed));
  std::set<std::vector<std::size_t>> used;
  std::vector<StatementProofPair> pairs;
  pairs.reserve(options.pairs);

  for (std::size_t n = 0; n < options.pairs; ++n) {
    std::vector<std::size_t> combo;
    for (int attempt = 0; attempt < kUniqueAttempts; ++attempt) {
      combo.clear();
      while (combo.size() < options.markers_per_pair) {
        const auto k = static_cast<std::size_t>(rng.below(markers));
        if (std::find(combo.begin(), combo.end(), k) == combo.end()) combo.push_back(k);
      }
      std::sort(combo.begin(), combo.end());
      if (!used.contains(combo)) break;
    }
    used.insert(combo);

    const auto make_text = [&](std::size_t length, std::size_t lo, std::size_t hi) {
      TokenSequence text;
      text.reserve(length);
      for (const auto k : combo) text.push_back(TypedToken::math("italic", "k" + std::to_string(k)));
      while (text.size() < length) {
        const auto t = lo + static_cast<std::size_t>(rng.below(hi - lo));
        text.push_back(TypedToken::word("t" + std::to_string(t)));
      }
      rng.shuffle(std::span<TypedToken>(text));
      return text;
    };

    StatementProofPair pair;
    pair.id = "synth-" + std::to_string(n);
    pair.doc = "synth-doc-" + std::to_string(n / 7);
    pair.statement = make_text(draw_between(rng, kStatementMin, kStatementMax), 0, statement_hi);
    pair.proof = make_text(draw_between(rng, kProofMin, kProofMax), proof_lo, background);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace proofmatch
