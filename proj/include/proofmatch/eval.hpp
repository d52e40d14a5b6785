#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "proofmatch/assignment.hpp"

namespace proofmatch {

// Statement i's gold proof is proof i throughout.
struct RankingResult {
  std::vector<std::vector<std::size_t>> rankings;  // best first
  std::vector<std::size_t> gold_ranks;              // 1-based
};

// Mean of 1/r. Throws DataError on empty input or a rank of 0.
double mrr(std::span<const std::size_t> ranks);

// Sorts each row by descending score, ties to the lower column.
RankingResult decode_local(const ScoreMatrix& m);

struct GlobalDecoding {
  Assignment assignment;
  bool degraded = false;
};

// Dense LAP when n <= k, otherwise the top-k pruned sparse LAP.
GlobalDecoding decode_global(const ScoreMatrix& m, std::size_t k = 500);

// Fractions of proofs that are the top choice of >= 2, exactly 1, and no
// statement under local decoding. They sum to 1.
struct UsageHistogram {
  double at_least_two = 0.0;
  double exactly_one = 0.0;
  double none = 0.0;
};

UsageHistogram proof_usage_histogram(const RankingResult& local);
UsageHistogram proof_usage_histogram(std::span<const std::size_t> top_choices);

struct EvalReport {
  double mrr = 0.0;
  double accuracy_local = 0.0;
  double accuracy_global = 0.0;
  std::size_t n = 0;
  bool degraded_global = false;
  UsageHistogram usage;
};

EvalReport evaluate(const ScoreMatrix& m, std::size_t k = 500);

// Row-streaming variant for matrices too large to hold: `score_row(i, row)`
// fills row i. Keeps only ranks, top choices and the top-k entries per row.
using RowScorer = std::function<void(std::size_t, std::span<double>)>;
EvalReport evaluate_rows(std::size_t n, const RowScorer& score_row, std::size_t k = 500);

// Local-decoding metrics only (no assignment solve), for model selection.
struct LocalMetrics {
  double mrr = 0.0;
  double accuracy = 0.0;
};
LocalMetrics evaluate_local(const ScoreMatrix& m);
LocalMetrics evaluate_local_rows(std::size_t n, const RowScorer& score_row);

}  // namespace proofmatch
