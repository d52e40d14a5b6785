#pragma once

#include <span>
#include <vector>

#include "proofmatch/corpus.hpp"
#include "proofmatch/training.hpp"

namespace proofmatch {

// Model input for one text: tokens of the kinds `mode` keeps, looked up in
// the vocabulary and truncated to max_len. A text left empty by the mode
// becomes a single PAD token so that every pair stays encodable.
TokenIds to_model_input(const TokenSequence& text, const Vocabulary& vocabulary, InputMode mode,
                        std::size_t max_len);

TrainingTexts model_texts(std::span<const StatementProofPair* const> pairs,
                          const Vocabulary& vocabulary, InputMode mode, std::size_t max_len);

std::vector<TokenSequence> statements_of(std::span<const StatementProofPair* const> pairs);
std::vector<TokenSequence> proofs_of(std::span<const StatementProofPair* const> pairs);

}  // namespace proofmatch
