#include "proofmatch/views.hpp"

namespace proofmatch {

TokenIds to_model_input(const TokenSequence& text, const Vocabulary& vocabulary, InputMode mode,
                        std::size_t max_len) {
  TokenIds ids;
  for (const auto& t : text) {
    if (ids.size() == max_len) break;
    if (keeps(mode, t)) ids.push_back(vocabulary.lookup(t));
  }
  if (ids.empty()) ids.push_back(Vocabulary::kPad);
  return ids;
}

TrainingTexts model_texts(std::span<const StatementProofPair* const> pairs,
                          const Vocabulary& vocabulary, InputMode mode, std::size_t max_len) {
  TrainingTexts out;
  out.statements.reserve(pairs.size());
  out.proofs.reserve(pairs.size());
  for (const auto* p : pairs) {
    out.statements.push_back(to_model_input(p->statement, vocabulary, mode, max_len));
    out.proofs.push_back(to_model_input(p->proof, vocabulary, mode, max_len));
  }
  return out;
}

std::vector<TokenSequence> statements_of(std::span<const StatementProofPair* const> pairs) {
  std::vector<TokenSequence> out;
  out.reserve(pairs.size());
  for (const auto* p : pairs) out.push_back(p->statement);
  return out;
}

std::vector<TokenSequence> proofs_of(std::span<const StatementProofPair* const> pairs) {
  std::vector<TokenSequence> out;
  out.reserve(pairs.size());
  for (const auto* p : pairs) out.push_back(p->proof);
  return out;
}

}  // namespace proofmatch
