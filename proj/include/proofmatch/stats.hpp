#pragma once

#include <vector>

#include "json.hpp"
#include "proofmatch/corpus.hpp"

namespace proofmatch {

struct Summary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;  // population standard deviation
};

Summary summarize(const std::vector<double>& values);

// Token counts of one side (statements or proofs), split by kind.
struct SideStats {
  Summary both;
  Summary text;
  Summary math;
  Summary math_proportion;  // math / both per text, in [0, 1]
};

struct CorpusStats {
  std::size_t pairs = 0;
  std::size_t documents = 0;
  SideStats statements;
  SideStats proofs;
};

CorpusStats corpus_stats(const std::vector<StatementProofPair>& pairs);
nlohmann::ordered_json to_json(const CorpusStats& stats);

}  // namespace proofmatch
