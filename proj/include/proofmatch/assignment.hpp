#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace proofmatch {

// Dense square matrix of statement-proof scores, row-major. Row i is a
// statement, column j a proof.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  explicit ScoreMatrix(std::size_t n, double fill = 0.0) : n_(n), values_(n * n, fill) {}
  ScoreMatrix(std::size_t n, std::vector<double> values);

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  std::span<double> row(std::size_t i) { return {values_.data() + i * n_, n_}; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * n_, n_}; }
  const std::vector<double>& values() const { return values_; }

  friend bool operator==(const ScoreMatrix&, const ScoreMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
};

struct SparseEntry {
  std::size_t column;
  double score;
  friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

// Per row, the min(k, n) best entries, best first (ties: lower column first).
struct SparseScoreMatrix {
  std::size_t n = 0;
  std::vector<std::vector<SparseEntry>> rows;
};

// perm[i] is the proof assigned to statement i.
struct Assignment {
  std::vector<std::size_t> perm;

  std::size_t size() const { return perm.size(); }
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

struct SparseSolution {
  Assignment assignment;
  // The kept edges admitted no perfect matching; missing edges were scored
  // kMissingEdgeScore to complete it.
  bool degraded = false;
};

inline constexpr double kMissingEdgeScore = -1e9;

bool is_permutation(const Assignment& a);

// Sum over rows of M[i][perm[i]].
double assignment_score(const Assignment& a, const ScoreMatrix& m);

// Score under a pruned matrix; edges that were pruned away count as
// kMissingEdgeScore. This is the objective solve_sparse maximizes.
double assignment_score(const Assignment& a, const SparseScoreMatrix& s);

// Maximum-weight perfect matching on a dense matrix. Shortest augmenting
// path (Hungarian) with row/column potentials, O(n^3) time, O(n^2) memory.
// Entries must be finite.
Assignment solve_dense(const ScoreMatrix& m);

// Keeps each row's min(k, n) largest entries. k must be >= 1.
SparseScoreMatrix prune_topk(const ScoreMatrix& m, std::size_t k);

// Maximum-weight perfect matching restricted to the kept edges, in the
// manner of LAP-MOD: successive shortest paths with Dijkstra over the sparse
// rows. When the kept edges admit no perfect matching, the problem is
// re-solved over the completed graph and the result is flagged degraded.
SparseSolution solve_sparse(const SparseScoreMatrix& s);

// Debug dump: n as uint64 followed by n*n float64, all little-endian.
void write_matrix(const ScoreMatrix& m, const std::filesystem::path& path);
ScoreMatrix read_matrix(const std::filesystem::path& path);

}  // namespace proofmatch
