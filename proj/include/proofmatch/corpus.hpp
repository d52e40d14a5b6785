#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "proofmatch/token.hpp"

namespace proofmatch {

struct StatementProofPair {
  std::string id;
  std::string doc;
  TokenSequence statement;
  TokenSequence proof;

  friend bool operator==(const StatementProofPair&, const StatementProofPair&) = default;
};

enum class Split { Train, Dev, Test };

Split parse_split(std::string_view name);
std::string_view to_string(Split split);

// Pairs plus an optional split labelling. The split map is empty until
// shuffle_and_split or apply_split has run.
struct PairCorpus {
  std::vector<StatementProofPair> pairs;
  std::map<std::string, Split> split;

  // Pairs in `which`, in corpus order.
  std::vector<const StatementProofPair*> select(Split which) const;

  friend bool operator==(const PairCorpus&, const PairCorpus&) = default;
};

// Keeps pairs whose statement and proof lengths both lie in [min_len, max_len].
std::vector<StatementProofPair> filter_pairs(std::vector<StatementProofPair> pairs,
                                             std::size_t min_len = 20,
                                             std::size_t max_len = 500);

// On-disk split: the seed plus the ids of each part, in shuffled order.
struct SplitAssignment {
  std::int64_t seed = 0;
  std::vector<std::string> train;
  std::vector<std::string> dev;
  std::vector<std::string> test;

  friend bool operator==(const SplitAssignment&, const SplitAssignment&) = default;
};

// Shuffles pair ids with Rng(seed) and cuts at floor(0.8 N) and floor(0.9 N).
// Throws DataError when N < 10.
SplitAssignment shuffle_and_split(const std::vector<StatementProofPair>& pairs,
                                  std::int64_t seed);

// Labels corpus pairs from a split file. Every corpus id must be covered
// exactly once and every split id must exist in the corpus.
PairCorpus apply_split(std::vector<StatementProofPair> pairs, const SplitAssignment& split);

class Vocabulary {
 public:
  static constexpr std::int32_t kPad = 0;
  static constexpr std::int32_t kUnk = 1;

  Vocabulary();

  // Tokens in `tokens` are appended in the given order after PAD and UNK.
  explicit Vocabulary(const std::vector<std::string>& tokens);

  std::int32_t lookup(const TypedToken& token) const;
  std::int32_t lookup(const std::string& serialized) const;
  std::vector<std::int32_t> encode(const TokenSequence& tokens) const;

  // Serialized tokens by id; entries 0 and 1 are "<pad>" and "<unk>".
  const std::vector<std::string>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::string> entries_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Counts tokens over Train statements and proofs; tokens seen at least
// min_freq times receive ids ordered by descending count, then by their
// serialized form. Throws DataError when the Train split is empty.
Vocabulary build_vocabulary(const PairCorpus& corpus, std::size_t min_freq = 2);

// JSONL corpus. Errors name the 1-based line number.
std::vector<StatementProofPair> load_pairs(const std::filesystem::path& path);
void save_pairs(const std::vector<StatementProofPair>& pairs, const std::filesystem::path& path);

// load_corpus returns an unsplit corpus; save_corpus writes only the pairs.
PairCorpus load_corpus(const std::filesystem::path& path);
void save_corpus(const PairCorpus& corpus, const std::filesystem::path& path);

SplitAssignment load_split(const std::filesystem::path& path);
void save_split(const SplitAssignment& split, const std::filesystem::path& path);

}  // namespace proofmatch
