// Acceptance suite: one PASS/FAIL line per criterion. Criteria can be
// selected by number on the command line (default: all).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "proofmatch/assignment.hpp"
#include "proofmatch/baselines.hpp"
#include "proofmatch/cli.hpp"
#include "proofmatch/corpus.hpp"
#include "proofmatch/encoder.hpp"
#include "proofmatch/error.hpp"
#include "proofmatch/eval.hpp"
#include "proofmatch/rng.hpp"
#include "proofmatch/synth.hpp"
#include "proofmatch/training.hpp"
#include "proofmatch/views.hpp"

using namespace proofmatch;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

ScoreMatrix random_integer_matrix(Rng& rng, std::size_t n, int range) {
  ScoreMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      m(i, j) = static_cast<double>(rng.below(static_cast<std::uint64_t>(range))) - range / 2;
    }
  }
  return m;
}

double exhaustive_best(const ScoreMatrix& m) {
  std::vector<std::size_t> perm(m.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  double best = -std::numeric_limits<double>::infinity();
  do {
    double s = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += m(i, perm[i]);
    best = std::max(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// 1 ---------------------------------------------------------------------------
Verdict lap_optimality() {
  const auto start = Clock::now();
  Rng rng(1001);
  std::size_t checked = 0, mismatches = 0;
  for (std::size_t n = 2; n <= 8; ++n) {
    for (int trial = 0; trial < 200; ++trial) {
      const auto m = random_integer_matrix(rng, n, 200);
      const auto a = solve_dense(m);
      if (!is_permutation(a) || assignment_score(a, m) != exhaustive_best(m)) ++mismatches;
      ++checked;
    }
  }
  const double t = seconds_since(start);
  return {mismatches == 0 && t < 30.0, std::to_string(checked) + " matrices n=2..8, " +
                                           std::to_string(mismatches) + " mismatches, " + fmt(t, 3) +
                                           " s (limit 30 s)"};
}

// 2 ---------------------------------------------------------------------------
Verdict sparse_dense_agreement() {
  const auto start = Clock::now();
  Rng rng(1002);
  std::size_t disagreements = 0, monotonicity_violations = 0, degraded_small_k = 0;
  for (int trial = 0; trial < 100; ++trial) {
    ScoreMatrix m(50);
    for (std::size_t i = 0; i < 50; ++i) {
      for (std::size_t j = 0; j < 50; ++j) m(i, j) = rng.normal();
    }
    const auto full = solve_sparse(prune_topk(m, 50));
    if (full.degraded ||
        assignment_score(full.assignment, m) != assignment_score(solve_dense(m), m)) {
      ++disagreements;
    }
    // Objective under each pruned matrix; pruned edges count kMissingEdgeScore.
    double previous = -std::numeric_limits<double>::infinity();
    for (const std::size_t k : {1, 5, 10, 25, 50}) {
      const auto pruned = prune_topk(m, k);
      const auto sol = solve_sparse(pruned);
      degraded_small_k += sol.degraded;
      const double s = assignment_score(sol.assignment, pruned);
      if (s < previous) ++monotonicity_violations;
      previous = s;
    }
  }
  const double t = seconds_since(start);
  return {disagreements == 0 && monotonicity_violations == 0 && t < 30.0,
          "100 matrices 50x50: " + std::to_string(disagreements) + " sparse/dense disagreements, " +
              std::to_string(monotonicity_violations) + " monotonicity violations (" +
              std::to_string(degraded_small_k) + " degraded solves at small k), " + fmt(t, 3) +
              " s (limit 30 s)"};
}

// 3 ---------------------------------------------------------------------------
struct GradientCheck {
  std::size_t sampled = 0;
  double worst = 0.0;
  std::string worst_name;
};

template <typename LossFn>
GradientCheck check_gradients(EncoderModel& model, const LossFn& loss, std::uint64_t seed) {
  for (auto& p : model.parameters()) p.grad.setZero();
  model.zero_grad();
  loss(model, true);
  std::vector<Matrix> analytic;
  for (const auto& p : model.parameters()) analytic.push_back(p.grad);

  GradientCheck out;
  Rng pick(seed);
  // Every parameter tensor at least 3 times, then 60 samples in total.
  std::vector<std::size_t> tensors;
  for (std::size_t k = 0; k < model.parameters().size(); ++k) {
    for (int r = 0; r < 3; ++r) tensors.push_back(k);
  }
  while (tensors.size() < 60) tensors.push_back(pick.below(model.parameters().size()));
  for (const auto k : tensors) {
    auto& param = model.parameters()[k];
    const auto idx = static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(param.value.size())));
    const double saved = param.value.data()[idx];
    const double h = 1e-5;
    param.value.data()[idx] = saved + h;
    const double up = loss(model, false);
    param.value.data()[idx] = saved - h;
    const double down = loss(model, false);
    param.value.data()[idx] = saved;
    const double numeric = (up - down) / (2 * h);
    const double g = analytic[k].data()[idx];
    // Relative error with a 1e-6 floor on the scale so exact zeros compare sanely.
    const double rel = std::abs(g - numeric) / std::max({std::abs(g), std::abs(numeric), 1e-6});
    if (rel > out.worst) {
      out.worst = rel;
      out.worst_name = param.name;
    }
    ++out.sampled;
  }
  return out;
}

Verdict gradient_checks() {
  const auto start = Clock::now();
  EncoderConfig c;
  c.vocab_size = 20;
  c.embed_dim = c.model_dim = 8;
  c.layers = 1;
  c.heads = 2;
  c.key_dim = 4;
  c.ffn_dim = 16;
  c.max_len = 16;
  Rng rng(1003);
  EncoderModel model(c, rng);
  // A larger head than the default init so gradients reach every encoder weight.
  for (Eigen::Index i = 0; i < model.bilinear().value.size(); ++i) {
    model.bilinear().value.data()[i] = rng.uniform(-0.5, 0.5);
  }
  const auto texts = [&](std::size_t n) {
    std::vector<TokenIds> out(n);
    for (auto& t : out) {
      t.resize(3 + rng.below(5));
      for (auto& id : t) id = static_cast<std::int32_t>(rng.below(20));
    }
    return out;
  };
  const auto s = texts(5), p = texts(5);

  const auto local = check_gradients(
      model,
      [&](EncoderModel& m, bool grad) {
        return grad ? local_loss(m, s, p) : local_loss(m.score_all(s, p)).loss;
      },
      7);
  const bool hinge_active = global_loss(model.score_all(s, p)).loss > 0.0;
  const auto global = check_gradients(
      model,
      [&](EncoderModel& m, bool grad) {
        return grad ? global_loss(m, s, p) : global_loss(m.score_all(s, p)).loss;
      },
      8);
  const double t = seconds_since(start);
  const bool pass = hinge_active && local.sampled >= 50 && global.sampled >= 50 &&
                    local.worst < 1e-3 && global.worst < 1e-3 && t < 60.0;
  return {pass, "local: " + std::to_string(local.sampled) + " params, max rel err " +
                    fmt(local.worst, 3) + " (" + local.worst_name + "); global: " +
                    std::to_string(global.sampled) + " params, max rel err " + fmt(global.worst, 3) +
                    " (" + global.worst_name + "), hinge active=" + (hinge_active ? "yes" : "no") +
                    "; " + fmt(t, 3) + " s (limit 60 s)"};
}

// 4 ---------------------------------------------------------------------------
Verdict metric_oracles() {
  const std::vector<std::size_t> ranks{1, 2, 4};
  const double m = mrr(ranks);
  bool pass = std::abs(m - 0.58333333333333333) <= 1e-12;
  std::string detail = "mrr([1,2,4]) = " + fmt(m, 17);
  double worst = 0.0;
  for (const std::size_t b : {2, 10, 60}) {
    const double l = local_loss(ScoreMatrix(b, 0.0)).loss;
    worst = std::max(worst, std::abs(l - static_cast<double>(b) * std::log(static_cast<double>(b))));
  }
  pass &= worst <= 1e-9;
  detail += "; |local_loss - b ln b| max " + fmt(worst, 3);
  Rng rng(1004);
  std::size_t wrong = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::size_t> perm(1 + rng.below(20));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(perm));
    std::size_t fixed = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) fixed += perm[i] == i;
    if (structured_cost(Assignment{perm}) != static_cast<double>(perm.size() - fixed)) ++wrong;
  }
  pass &= wrong == 0;
  detail += "; structured_cost mismatches " + std::to_string(wrong) + "/1000";
  return {pass, detail};
}

// 5 ---------------------------------------------------------------------------
TokenSequence words(std::initializer_list<const char*> surfaces) {
  TokenSequence t;
  for (const auto* s : surfaces) t.push_back(TypedToken::word(s));
  return t;
}

Verdict baseline_oracles() {
  double worst = 0.0;
  const auto track = [&](double got, double expected) {
    worst = std::max(worst, std::abs(got - expected));
  };
  track(dice_score(words({"a", "a", "b"}), words({"a", "c"})), 0.4);
  track(dice_score(words({"a", "b", "c"}), words({"a", "b", "c"})), 1.0);

  // D1 = a a b, D2 = b c, D3 = c c c d; values computed by hand.
  const std::vector<TokenSequence> docs{words({"a", "a", "b"}), words({"b", "c"}),
                                        words({"c", "c", "c", "d"})};
  const auto model = tfidf_fit(docs);
  track(model.idf("w:a"), 1.6931471805599454);
  track(model.idf("w:b"), 1.2876820724517808);
  track(model.idf("w:e"), 2.386294361119891);
  const auto v1 = tfidf_vector(model, docs[0]);
  const auto v2 = tfidf_vector(model, docs[1]);
  const auto v3 = tfidf_vector(model, docs[2]);
  track(v1.entries.at(0).second, 0.9347019636214327);
  track(v1.entries.at(1).second, 0.35543246785041743);
  track(v3.entries.at(0).second, 0.9158903319694655);
  track(v3.entries.at(1).second, 0.40142857372745955);
  track(cosine(v1, v2), 0.2513287082708997);
  track(cosine(v2, v3), 0.6476322645588072);
  track(cosine(v1, v3), 0.0);
  track(cosine(tfidf_vector(model, words({"a", "e"})), v1), 0.5408811676305951);

  Rng rng(1005);
  std::size_t violations = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    TokenSequence s, p;
    const auto ns = 1 + rng.below(10), np = rng.below(10);
    for (std::uint64_t i = 0; i < ns; ++i) s.push_back(TypedToken::word(std::to_string(rng.below(8))));
    for (std::uint64_t i = 0; i < np; ++i) p.push_back(TypedToken::word(std::to_string(rng.below(8))));
    const double d = dice_score(s, p);
    if (d != dice_score(p, s) || d < 0.0 || d > 1.0) ++violations;
  }
  return {worst <= 1e-10 && violations == 0,
          "max fixture deviation " + fmt(worst, 3) + " (tol 1e-10); dice symmetry/range violations " +
              std::to_string(violations) + "/10000"};
}

// 6, 7, 9 ----------------------------------------------------------------------
int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"proofmatch"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::fprintf(stderr, "proofmatch exited %d: %s\n", code, err.str().c_str());
  return code;
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

struct SyntheticRun {
  bool ok = false;
  double train_seconds = 0.0;
  nlohmann::json report;
  std::string report_bytes, checkpoint_bytes, log_bytes;
};

class SyntheticExperiment {
 public:
  explicit SyntheticExperiment(fs::path dir) : dir_(std::move(dir)) {
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    prepared_ =
        cli({"synth", "--pairs", "2000", "--vocab", "500", "--overlap", "0.5", "--seed", "42",
             "--out", path("corpus.jsonl")}) == 0 &&
        cli({"split", "--corpus", path("corpus.jsonl"), "--seed", "42", "--out", path("split.json")}) == 0;
    std::ofstream(path("config.json"))
        << R"({"encoder": {"embed_dim": 64, "model_dim": 64, "layers": 2, "heads": 4,
              "key_dim": 16, "ffn_dim": 128, "dropout": 0.1},
  "train": {"batch_size": 20, "epochs": 50, "eval_every": 10, "lr": 0.001, "seed": 42}})";
  }

  ~SyntheticExperiment() { fs::remove_all(dir_); }

  SyntheticRun train_and_evaluate(const std::string& objective, const std::string& tag) {
    SyntheticRun r;
    if (!prepared_) return r;
    const auto start = Clock::now();
    if (cli({"train", "--corpus", path("corpus.jsonl"), "--split", path("split.json"), "--config",
             path("config.json"), "--objective", objective, "--out", path(tag + ".ckpt"), "--log",
             path(tag + ".log")}) != 0) {
      return r;
    }
    r.train_seconds = seconds_since(start);
    if (cli({"evaluate", "--model", path(tag + ".ckpt"), "--corpus", path("corpus.jsonl"), "--split",
             path("split.json"), "--set", "dev", "--mode", "both", "--k", "500", "--report",
             path(tag + ".json")}) != 0) {
      return r;
    }
    r.report_bytes = slurp(path(tag + ".json"));
    r.checkpoint_bytes = slurp(path(tag + ".ckpt"));
    r.log_bytes = slurp(path(tag + ".log"));
    r.report = nlohmann::json::parse(r.report_bytes);
    r.ok = true;
    return r;
  }

 private:
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  bool prepared_ = false;
};

Verdict synthetic_local(const SyntheticRun& local) {
  if (!local.ok) return {false, "training or evaluation failed"};
  const double acc = local.report["accuracy_local"].get<double>();
  return {acc >= 0.90 && local.train_seconds < 900.0,
          "dev accuracy (local decoding) " + fmt(acc) + " (need >= 0.90), mrr " +
              fmt(local.report["mrr"].get<double>()) + "; training " + fmt(local.train_seconds, 4) +
              " s (limit 900 s)"};
}

Verdict synthetic_global(const SyntheticRun& local, const SyntheticRun& hybrid) {
  if (!local.ok || !hybrid.ok) return {false, "training or evaluation failed"};
  const double l_local = local.report["accuracy_local"].get<double>();
  const double l_global = local.report["accuracy_global"].get<double>();
  const double h_global = hybrid.report["accuracy_global"].get<double>();
  return {l_global >= l_local - 0.01 && h_global >= l_global - 0.02,
          "local-objective model: global " + fmt(l_global) + " vs local " + fmt(l_local) +
              " (need global >= local - 0.01); hybrid-objective global " + fmt(h_global) +
              " (need >= " + fmt(l_global - 0.02) + "), hybrid local " +
              fmt(hybrid.report["accuracy_local"].get<double>()) + ", hybrid training " +
              fmt(hybrid.train_seconds, 4) + " s"};
}

Verdict determinism(const SyntheticRun& a, const SyntheticRun& a2, const SyntheticRun& b,
                    const SyntheticRun& b2) {
  if (!a.ok || !a2.ok || !b.ok || !b2.ok) return {false, "training or evaluation failed"};
  const bool reports = a.report_bytes == a2.report_bytes && b.report_bytes == b2.report_bytes;
  const bool checkpoints = a.checkpoint_bytes == a2.checkpoint_bytes && b.checkpoint_bytes == b2.checkpoint_bytes;
  const bool logs = a.log_bytes == a2.log_bytes && b.log_bytes == b2.log_bytes;
  return {reports && checkpoints && logs,
          std::string("reports identical: ") + (reports ? "yes" : "no") +
              ", checkpoints identical: " + (checkpoints ? "yes" : "no") +
              ", training logs identical: " + (logs ? "yes" : "no") + " (local and hybrid reruns)"};
}

// 8 ---------------------------------------------------------------------------
Verdict usage_histogram_untrained() {
  SynthOptions o;
  o.pairs = 5000;
  o.seed = 42;
  const auto pairs = synthesize(o);
  const auto corpus = apply_split(pairs, shuffle_and_split(pairs, 42));
  const auto vocab = build_vocabulary(corpus);
  const auto dev = model_texts(corpus.select(Split::Dev), vocab, InputMode::Both, 500);
  EncoderConfig c;
  c.vocab_size = vocab.size();
  c.embed_dim = c.model_dim = 64;
  c.layers = 2;
  c.heads = 4;
  c.key_dim = 16;
  c.ffn_dim = 128;
  Rng rng(42);
  const EncoderModel model(c, rng);
  const Matrix s = model.encode_all(dev.statements);
  const Matrix p = model.encode_all(dev.proofs);
  const auto report = evaluate_rows(dev.size(), [&](std::size_t i, std::span<double> row) {
    model.score_row(s, p, i, row);
  });
  const auto& h = report.usage;
  return {dev.size() == 500 && h.at_least_two > 0.0 && h.none > 0.0,
          std::to_string(dev.size()) + " dev pairs, untrained model: proofs chosen >=2 times " +
              fmt(h.at_least_two) + ", exactly once " + fmt(h.exactly_one) + ", never " +
              fmt(h.none)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  const auto wanted = [&](int c) { return selected.empty() || selected.count(c) > 0; };

  int failures = 0;
  const auto report = [&](int criterion, const std::string& name, const Verdict& v) {
    std::printf("%s  criterion %d  %s: %s\n", v.pass ? "PASS" : "FAIL", criterion, name.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
    failures += !v.pass;
  };
  const auto guarded = [&](int criterion, const std::string& name, const std::function<Verdict()>& f) {
    if (!wanted(criterion)) return;
    try {
      report(criterion, name, f());
    } catch (const std::exception& e) {
      report(criterion, name, {false, std::string("exception: ") + e.what()});
    }
  };

  guarded(1, "LAP optimality", lap_optimality);
  guarded(2, "sparse/dense agreement and pruning monotonicity", sparse_dense_agreement);
  guarded(3, "gradient checks", gradient_checks);
  guarded(4, "metric oracles", metric_oracles);
  guarded(5, "baseline oracles", baseline_oracles);

  if (wanted(6) || wanted(7) || wanted(9)) {
    SyntheticExperiment experiment(fs::temp_directory_path() / "proofmatch_acceptance");
    const auto local = experiment.train_and_evaluate("local", "local");
    SyntheticRun hybrid;
    if (wanted(7) || wanted(9)) hybrid = experiment.train_and_evaluate("hybrid", "hybrid");
    guarded(6, "synthetic end-to-end (local)", [&] { return synthetic_local(local); });
    guarded(7, "global vs local decoding on synthetic", [&] { return synthetic_global(local, hybrid); });
    guarded(8, "proof-usage histogram on an untrained model", usage_histogram_untrained);
    if (wanted(9)) {
      const auto local2 = experiment.train_and_evaluate("local", "local_rerun");
      const auto hybrid2 = experiment.train_and_evaluate("hybrid", "hybrid_rerun");
      guarded(9, "determinism", [&] { return determinism(local, local2, hybrid, hybrid2); });
    }
  } else {
    guarded(8, "proof-usage histogram on an untrained model", usage_histogram_untrained);
  }

  std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
  return failures == 0 ? 0 : 1;
}
