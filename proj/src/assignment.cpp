#include "proofmatch/assignment.hpp"

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <queue>

#include "proofmatch/error.hpp"

namespace proofmatch {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

}  // namespace

ScoreMatrix::ScoreMatrix(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) throw DataError("score matrix must be square");
}

bool is_permutation(const Assignment& a) {
  std::vector<bool> used(a.size(), false);
  for (const auto j : a.perm) {
    if (j >= a.size() || used[j]) return false;
    used[j] = true;
  }
  return true;
}

double assignment_score(const Assignment& a, const ScoreMatrix& m) {
  if (a.size() != m.size()) throw DataError("assignment and matrix sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += m(i, a.perm[i]);
  return total;
}

double assignment_score(const Assignment& a, const SparseScoreMatrix& s) {
  if (a.size() != s.n) throw DataError("assignment and matrix sizes differ");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& row = s.rows[i];
    const auto it = std::find_if(row.begin(), row.end(),
                                 [&](const SparseEntry& e) { return e.column == a.perm[i]; });
    total += it == row.end() ? kMissingEdgeScore : it->score;
  }
  return total;
}

Assignment solve_dense(const ScoreMatrix& m) {
  const std::size_t n = m.size();
  Assignment out;
  out.perm.resize(n);
  if (n == 0) return out;

  // Minimizes cost = -score. Index 0 is a virtual column holding the row
  // being inserted; rows and columns are 1-based below.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
  std::vector<bool> used(n + 1);

  for (std::size_t i = 1; i <= n; ++i) {
    row_of[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), false);
    do {
      used[j0] = true;
      const std::size_t i0 = row_of[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = -m(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      row_of[j0] = row_of[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) out.perm[row_of[j] - 1] = j - 1;
  assert(is_permutation(out));
  return out;
}

SparseScoreMatrix prune_topk(const ScoreMatrix& m, std::size_t k) {
  if (k == 0) throw DataError("prune_topk needs k >= 1");
  const std::size_t n = m.size();
  const std::size_t keep = std::min(k, n);
  SparseScoreMatrix s;
  s.n = n;
  s.rows.resize(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = m.row(i);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(keep),
                      order.end(), [&](std::size_t a, std::size_t b) {
                        if (row[a] != row[b]) return row[a] > row[b];
                        return a < b;
                      });
    auto& out = s.rows[i];
    out.reserve(keep);
    for (std::size_t t = 0; t < keep; ++t) out.push_back({order[t], row[order[t]]});
  }
  return s;
}

namespace {

// Successive shortest augmenting paths over a sparse cost graph
// (cost = -score). Maintains row potentials u and column potentials v with
// reduced costs c - u - v >= 0 on every edge and = 0 on matched edges, so
// each augmentation is a Dijkstra search from one free row.
class SparseAugmenter {
 public:
  SparseAugmenter(const SparseScoreMatrix& s, bool complete)
      : s_(s),
        n_(s.n),
        complete_(complete),
        u_(n_, 0.0),
        v_(n_, 0.0),
        row_of_col_(n_, kNone),
        col_of_row_(n_, kNone),
        dist_(n_, kInf),
        pred_(n_, kNone),
        finalized_(n_, false),
        explicit_mark_(complete ? n_ : 0, false) {}

  bool run() {
    for (std::size_t i = 0; i < n_; ++i) {
      double best = complete_ && s_.rows[i].size() < n_ ? kMissingCost : kInf;
      for (const auto& e : s_.rows[i]) best = std::min(best, -e.score);
      if (best == kInf) return false;
      u_[i] = best;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (!augment(i)) return false;
    }
    return true;
  }

  Assignment assignment() const {
    Assignment a;
    a.perm = col_of_row_;
    return a;
  }

 private:
  static constexpr double kMissingCost = -kMissingEdgeScore;
  // Rounding can leave reduced costs a hair below zero.
  static constexpr double kDualTolerance = 1e-10;

  using HeapItem = std::pair<double, std::size_t>;
  using Heap = std::priority_queue<HeapItem, std::vector<HeapItem>, std::greater<>>;

  void relax(std::size_t i, std::size_t j, double cost, double base, Heap& heap) {
    if (finalized_[j]) return;
    double reduced = cost - u_[i] - v_[j];
    if (reduced < 0.0 && reduced > -kDualTolerance) reduced = 0.0;
    const double d = base + reduced;
    if (d < dist_[j]) {
      if (dist_[j] == kInf) touched_.push_back(j);
      dist_[j] = d;
      pred_[j] = i;
      heap.emplace(d, j);
    }
  }

  void scan_row(std::size_t i, double base, Heap& heap) {
    for (const auto& e : s_.rows[i]) relax(i, e.column, -e.score, base, heap);
    if (!complete_ || s_.rows[i].size() == n_) return;
    for (const auto& e : s_.rows[i]) explicit_mark_[e.column] = true;
    for (std::size_t j = 0; j < n_; ++j) {
      if (!explicit_mark_[j]) relax(i, j, kMissingCost, base, heap);
    }
    for (const auto& e : s_.rows[i]) explicit_mark_[e.column] = false;
  }

  bool augment(std::size_t root) {
    Heap heap;
    finals_.clear();
    scan_row(root, 0.0, heap);

    std::size_t free_col = kNone;
    double delta = 0.0;
    while (!heap.empty()) {
      const auto [d, j] = heap.top();
      heap.pop();
      if (finalized_[j] || d > dist_[j]) continue;
      finalized_[j] = true;
      finals_.push_back(j);
      if (row_of_col_[j] == kNone) {
        free_col = j;
        delta = d;
        break;
      }
      scan_row(row_of_col_[j], d, heap);
    }

    if (free_col != kNone) {
      for (const auto j : finals_) {
        if (j == free_col) continue;
        const double shift = delta - dist_[j];
        v_[j] -= shift;
        u_[row_of_col_[j]] += shift;
      }
      u_[root] += delta;
      std::size_t j = free_col;
      while (true) {
        const std::size_t i = pred_[j];
        const std::size_t previous = col_of_row_[i];
        col_of_row_[i] = j;
        row_of_col_[j] = i;
        if (i == root) break;
        j = previous;
      }
    }

    for (const auto j : touched_) {
      dist_[j] = kInf;
      pred_[j] = kNone;
      finalized_[j] = false;
    }
    touched_.clear();
    return free_col != kNone;
  }

  const SparseScoreMatrix& s_;
  std::size_t n_;
  bool complete_;
  std::vector<double> u_, v_;
  std::vector<std::size_t> row_of_col_, col_of_row_;
  std::vector<double> dist_;
  std::vector<std::size_t> pred_;
  std::vector<bool> finalized_;
  std::vector<bool> explicit_mark_;
  std::vector<std::size_t> touched_, finals_;
};

void validate_sparse(const SparseScoreMatrix& s) {
  if (s.rows.size() != s.n) throw DataError("sparse matrix row count differs from n");
  std::vector<bool> seen(s.n, false);
  for (const auto& row : s.rows) {
    for (const auto& e : row) {
      if (e.column >= s.n) throw DataError("sparse matrix column out of range");
      if (seen[e.column]) throw DataError("duplicate column in sparse matrix row");
      if (!std::isfinite(e.score)) throw DataError("non-finite score in sparse matrix");
      seen[e.column] = true;
    }
    for (const auto& e : row) seen[e.column] = false;
  }
}

}  // namespace

SparseSolution solve_sparse(const SparseScoreMatrix& s) {
  validate_sparse(s);
  SparseSolution out;
  {
    SparseAugmenter solver(s, false);
    if (solver.run()) {
      out.assignment = solver.assignment();
      assert(is_permutation(out.assignment));
      return out;
    }
  }
  SparseAugmenter completed(s, true);
  const bool ok = completed.run();
  assert(ok);
  (void)ok;
  out.assignment = completed.assignment();
  out.degraded = true;
  assert(is_permutation(out.assignment));
  return out;
}

void write_matrix(const ScoreMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  const std::uint64_t n = m.size();
  out.write(reinterpret_cast<const char*>(&n), sizeof n);
  out.write(reinterpret_cast<const char*>(m.values().data()),
            static_cast<std::streamsize>(m.values().size() * sizeof(double)));
  if (!out) throw DataError("failed writing " + path.string());
}

ScoreMatrix read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open matrix " + path.string());
  std::uint64_t n = 0;
  if (!in.read(reinterpret_cast<char*>(&n), sizeof n)) throw DataError("truncated matrix header");
  std::vector<double> values(n * n);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw DataError("truncated matrix data");
  }
  return ScoreMatrix(n, std::move(values));
}

}  // namespace proofmatch
