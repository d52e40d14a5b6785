#include "proofmatch/eval.hpp"

#include <algorithm>
#include <numeric>

#include "proofmatch/error.hpp"

namespace proofmatch {

namespace {

// 1-based rank of column `gold` in `row` under the descending, lower-column
// tie order.
std::size_t rank_of(std::span<const double> row, std::size_t gold) {
  const double g = row[gold];
  std::size_t ahead = 0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] > g || (row[j] == g && j < gold)) ++ahead;
  }
  return ahead + 1;
}

std::size_t top_choice(std::span<const double> row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < row.size(); ++j) {
    if (row[j] > row[best]) best = j;
  }
  return best;
}

}  // namespace

double mrr(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw DataError("mrr of an empty rank list");
  double total = 0.0;
  for (const auto r : ranks) {
    if (r == 0) throw DataError("ranks are 1-based");
    total += 1.0 / static_cast<double>(r);
  }
  return total / static_cast<double>(ranks.size());
}

RankingResult decode_local(const ScoreMatrix& m) {
  const std::size_t n = m.size();
  RankingResult out;
  out.rankings.resize(n);
  out.gold_ranks.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    auto& order = out.rankings[i];
    order.resize(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
    out.gold_ranks[i] =
        static_cast<std::size_t>(std::find(order.begin(), order.end(), i) - order.begin()) + 1;
  }
  return out;
}

GlobalDecoding decode_global(const ScoreMatrix& m, std::size_t k) {
  if (m.size() <= k) return {solve_dense(m), false};
  auto solution = solve_sparse(prune_topk(m, k));
  return {std::move(solution.assignment), solution.degraded};
}

UsageHistogram proof_usage_histogram(std::span<const std::size_t> top_choices) {
  const std::size_t n = top_choices.size();
  UsageHistogram h;
  if (n == 0) return h;
  std::vector<std::size_t> uses(n, 0);
  for (const auto j : top_choices) ++uses[j];
  std::size_t many = 0, one = 0, none = 0;
  for (const auto u : uses) {
    if (u >= 2) ++many;
    else if (u == 1) ++one;
    else ++none;
  }
  const auto total = static_cast<double>(n);
  h.at_least_two = static_cast<double>(many) / total;
  h.exactly_one = static_cast<double>(one) / total;
  h.none = static_cast<double>(none) / total;
  return h;
}

UsageHistogram proof_usage_histogram(const RankingResult& local) {
  std::vector<std::size_t> top;
  top.reserve(local.rankings.size());
  for (const auto& r : local.rankings) top.push_back(r.front());
  return proof_usage_histogram(top);
}

LocalMetrics evaluate_local_rows(std::size_t n, const RowScorer& score_row) {
  if (n == 0) throw DataError("cannot evaluate an empty matrix");
  std::vector<std::size_t> ranks(n);
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    score_row(i, row);
    ranks[i] = rank_of(row, i);
  }
  const auto hits = std::count(ranks.begin(), ranks.end(), std::size_t{1});
  return {mrr(ranks), static_cast<double>(hits) / static_cast<double>(n)};
}

LocalMetrics evaluate_local(const ScoreMatrix& m) {
  return evaluate_local_rows(m.size(), [&](std::size_t i, std::span<double> out) {
    const auto src = m.row(i);
    std::copy(src.begin(), src.end(), out.begin());
  });
}

EvalReport evaluate_rows(std::size_t n, const RowScorer& score_row, std::size_t k) {
  if (n == 0) throw DataError("cannot evaluate an empty matrix");
  if (k == 0) throw DataError("k must be at least 1");

  std::vector<std::size_t> ranks(n), top(n);
  std::vector<double> row(n);
  const bool dense = n <= k;
  ScoreMatrix full(dense ? n : 0);
  SparseScoreMatrix pruned;
  pruned.n = n;
  if (!dense) pruned.rows.resize(n);

  std::vector<std::size_t> order(n);
  const std::size_t keep = std::min(k, n);
  for (std::size_t i = 0; i < n; ++i) {
    score_row(i, row);
    ranks[i] = rank_of(row, i);
    top[i] = top_choice(row);
    if (dense) {
      std::copy(row.begin(), row.end(), full.row(i).begin());
      continue;
    }
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep), order.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    auto& kept = pruned.rows[i];
    kept.reserve(keep);
    for (std::size_t t = 0; t < keep; ++t) kept.push_back({order[t], row[order[t]]});
  }

  EvalReport report;
  report.n = n;
  report.mrr = mrr(ranks);
  report.accuracy_local =
      static_cast<double>(std::count(ranks.begin(), ranks.end(), std::size_t{1})) /
      static_cast<double>(n);
  report.usage = proof_usage_histogram(top);

  Assignment assignment;
  if (dense) {
    assignment = solve_dense(full);
  } else {
    auto solution = solve_sparse(pruned);
    assignment = std::move(solution.assignment);
    report.degraded_global = solution.degraded;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (assignment.perm[i] == i) ++correct;
  }
  report.accuracy_global = static_cast<double>(correct) / static_cast<double>(n);
  return report;
}

EvalReport evaluate(const ScoreMatrix& m, std::size_t k) {
  return evaluate_rows(
      m.size(),
      [&](std::size_t i, std::span<double> out) {
        const auto src = m.row(i);
        std::copy(src.begin(), src.end(), out.begin());
      },
      k);
}

}  // namespace proofmatch
