#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "proofmatch/error.hpp"
#include "proofmatch/eval.hpp"
#include "proofmatch/rng.hpp"

using namespace proofmatch;

namespace {

ScoreMatrix identity(std::size_t n) {
  ScoreMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

ScoreMatrix random_matrix(Rng& rng, std::size_t n) {
  ScoreMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.normal();
  }
  return m;
}

}  // namespace

TEST_CASE("mrr") {
  const std::vector<std::size_t> ones{1, 1, 1};
  CHECK(mrr(ones) == 1.0);
  const std::vector<std::size_t> ranks{1, 2, 4};
  CHECK(std::abs(mrr(ranks) - 0.5833333333333334) < 1e-12);
  const std::vector<std::size_t> threes(17, 3);
  CHECK(std::abs(mrr(threes) - 1.0 / 3.0) < 1e-15);
  CHECK_THROWS_AS(mrr(std::vector<std::size_t>{}), DataError);
  CHECK_THROWS_AS(mrr(std::vector<std::size_t>{0}), DataError);
}

TEST_CASE("decode_local") {
  const auto id = decode_local(identity(4));
  for (const auto r : id.gold_ranks) CHECK(r == 1);

  const auto constant = decode_local(ScoreMatrix(4, 0.5));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(constant.rankings[i][0] == 0);
    CHECK(constant.gold_ranks[i] == i + 1);
  }

  Rng rng(1);
  const auto m = random_matrix(rng, 6);
  const auto r = decode_local(m);
  for (std::size_t i = 0; i < 6; ++i) {
    std::vector<std::size_t> order(6);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return m(i, a) > m(i, b); });
    CHECK(r.rankings[i] == order);
    CHECK(order[r.gold_ranks[i] - 1] == i);
  }
}

TEST_CASE("decode_global") {
  Rng rng(2);
  const auto small = random_matrix(rng, 3);
  CHECK(decode_global(small).assignment == solve_dense(small));
  CHECK(decode_global(identity(30), 2).assignment.perm[17] == 17);

  const auto m = random_matrix(rng, 50);
  const auto k10 = decode_global(m, 10);
  const auto k50 = decode_global(m, 50);
  CHECK(!k50.degraded);
  if (!k10.degraded) {
    CHECK(assignment_score(k50.assignment, m) >= assignment_score(k10.assignment, m));
  }
  CHECK(assignment_score(k50.assignment, m) == assignment_score(solve_dense(m), m));
}

TEST_CASE("evaluate reports") {
  const auto perfect = evaluate(identity(5));
  CHECK(perfect.mrr == 1.0);
  CHECK(perfect.accuracy_local == 1.0);
  CHECK(perfect.accuracy_global == 1.0);
  CHECK(perfect.n == 5);

  // Anti-diagonal dominant on even n: the gold proof is never the argmax.
  ScoreMatrix anti(6, 0.0);
  for (std::size_t i = 0; i < 6; ++i) anti(i, 5 - i) = 1.0;
  const auto r = evaluate(anti);
  CHECK(r.accuracy_local == 0.0);
  CHECK(r.accuracy_global == 0.0);
}

TEST_CASE("accuracy and mrr bounds on random matrices") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_matrix(rng, 2 + rng.below(20));
    const auto r = evaluate(m);
    CHECK(r.accuracy_local <= r.mrr + 1e-15);
    CHECK(r.mrr <= r.accuracy_local + (1.0 - r.accuracy_local) * 0.5 + 1e-15);
    CHECK(r.mrr <= 1.0);
  }
}

TEST_CASE("streaming evaluation equals the dense path") {
  Rng rng(4);
  for (const std::size_t n : {5, 40}) {
    const auto m = random_matrix(rng, n);
    for (const std::size_t k : {3, 500}) {
      const auto dense = evaluate(m, k);
      const auto rows = evaluate_rows(
          n, [&](std::size_t i, std::span<double> out) {
            std::copy(m.row(i).begin(), m.row(i).end(), out.begin());
          },
          k);
      CHECK(rows.mrr == dense.mrr);
      CHECK(rows.accuracy_local == dense.accuracy_local);
      CHECK(rows.accuracy_global == dense.accuracy_global);
      CHECK(rows.usage.none == dense.usage.none);
    }
    const auto local = evaluate_local(m);
    CHECK(local.mrr == evaluate(m).mrr);
  }
}

TEST_CASE("proof usage histogram") {
  const auto id = proof_usage_histogram(decode_local(identity(4)));
  CHECK(id.at_least_two == 0.0);
  CHECK(id.exactly_one == 1.0);
  CHECK(id.none == 0.0);

  const auto constant = proof_usage_histogram(decode_local(ScoreMatrix(5, 1.0)));
  CHECK(constant.at_least_two == doctest::Approx(0.2));
  CHECK(constant.exactly_one == 0.0);
  CHECK(constant.none == doctest::Approx(0.8));

  Rng rng(5);
  const auto m = random_matrix(rng, 30);
  const auto local = decode_local(m);
  std::vector<int> counts(30, 0);
  for (const auto& r : local.rankings) ++counts[r[0]];
  double two = 0, one = 0, zero = 0;
  for (const int c : counts) (c >= 2 ? two : c == 1 ? one : zero) += 1.0 / 30;
  const auto h = proof_usage_histogram(local);
  CHECK(h.at_least_two == doctest::Approx(two));
  CHECK(h.exactly_one == doctest::Approx(one));
  CHECK(h.none == doctest::Approx(zero));
  CHECK(h.at_least_two + h.exactly_one + h.none == doctest::Approx(1.0));
}
