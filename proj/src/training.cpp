#include "proofmatch/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "proofmatch/error.hpp"

namespace proofmatch {

Objective parse_objective(std::string_view name) {
  if (name == "local") return Objective::Local;
  if (name == "hybrid") return Objective::HybridGlobal;
  throw DataError("unknown objective \"" + std::string(name) + "\"");
}

std::string_view to_string(Objective objective) {
  return objective == Objective::Local ? "local" : "hybrid";
}

SelectionMetric parse_selection_metric(std::string_view name) {
  if (name == "dev_mrr_local") return SelectionMetric::DevMrrLocal;
  if (name == "dev_acc_local") return SelectionMetric::DevAccLocal;
  throw DataError("unknown selection metric \"" + std::string(name) + "\"");
}

std::string_view to_string(SelectionMetric metric) {
  return metric == SelectionMetric::DevMrrLocal ? "dev_mrr_local" : "dev_acc_local";
}

void TrainConfig::validate() const {
  if (batch_size < 2) throw DataError("batch_size must be at least 2");
  if (eval_every == 0 || epochs % eval_every != 0) {
    throw DataError("eval_every must be positive and divide epochs");
  }
  if (!(lr > 0.0) || !(lr_decay > 0.0)) throw DataError("lr and lr_decay must be positive");
}

// --- Score-level losses ------------------------------------------------------

ScoreLoss local_loss(const ScoreMatrix& m) {
  const std::size_t b = m.size();
  if (b < 2) throw DataError("local loss needs at least 2 pairs per batch");
  ScoreLoss out{0.0, ScoreMatrix(b)};
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = m.row(i);
    const double top = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (const double x : row) sum += std::exp(x - top);
    const double log_z = top + std::log(sum);
    out.loss += log_z - row[i];
    auto grad = out.upstream.row(i);
    for (std::size_t j = 0; j < b; ++j) grad[j] = std::exp(row[j] - log_z);
    grad[i] -= 1.0;
  }
  return out;
}

double structured_cost(const Assignment& predicted) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted.perm[i] != i) ++wrong;
  }
  return static_cast<double>(wrong);
}

ScoreMatrix loss_augmented(const ScoreMatrix& m) {
  ScoreMatrix out = m;
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (i != j) out(i, j) += 1.0;
    }
  }
  return out;
}

GlobalScoreLoss global_loss(const ScoreMatrix& m) {
  const std::size_t n = m.size();
  GlobalScoreLoss out{0.0, ScoreMatrix(n), solve_dense(loss_augmented(m))};
  Assignment gold;
  gold.perm.resize(n);
  std::iota(gold.perm.begin(), gold.perm.end(), std::size_t{0});

  const double hinge = structured_cost(out.predicted) + assignment_score(out.predicted, m) -
                       assignment_score(gold, m);
  if (hinge > 0.0) {
    out.loss = hinge;
    for (std::size_t i = 0; i < n; ++i) {
      out.upstream(i, out.predicted.perm[i]) += 1.0;
      out.upstream(i, i) -= 1.0;
    }
  }
  return out;
}

double local_loss(EncoderModel& model, std::span<const TokenIds> statements,
                  std::span<const TokenIds> proofs, Rng* dropout_rng) {
  ScoringPass pass(model);
  const auto scores = pass.forward(statements, proofs, dropout_rng);
  auto result = local_loss(scores);
  pass.backward(result.upstream);
  return result.loss;
}

double global_loss(EncoderModel& model, std::span<const TokenIds> statements,
                   std::span<const TokenIds> proofs, Rng* dropout_rng) {
  ScoringPass pass(model);
  const auto scores = pass.forward(statements, proofs, dropout_rng);
  auto result = global_loss(scores);
  if (result.loss > 0.0) pass.backward(result.upstream);
  return result.loss;
}

// --- ASGD --------------------------------------------------------------------

AsgdOptimizer::AsgdOptimizer(const EncoderModel& model, double lr, double lr_decay)
    : lr_(lr), lr_decay_(lr_decay) {
  average_.reserve(model.parameters().size());
  for (const auto& p : model.parameters()) average_.push_back(p.value);
  row_synced_.assign(static_cast<std::size_t>(model.embedding().value.rows()), 0);
}

void AsgdOptimizer::step(EncoderModel& model) {
  auto& params = model.parameters();
  const auto& rows = model.touched_rows();
  for (std::size_t p = 1; p < params.size(); ++p) {
    if (!params[p].grad.allFinite()) throw DivergenceError("diverged");
  }
  for (const auto r : rows) {
    if (!params[0].grad.row(static_cast<Eigen::Index>(r)).allFinite()) {
      throw DivergenceError("diverged");
    }
  }

  ++steps_;
  const double t = static_cast<double>(steps_);

  for (std::size_t p = 1; p < params.size(); ++p) {
    auto& value = params[p].value;
    value.noalias() -= lr_ * params[p].grad;
    average_[p] += (value - average_[p]) / t;
  }

  auto& emb = params[0].value;
  auto& emb_avg = average_[0];
  for (const auto r : rows) {
    const auto row = static_cast<Eigen::Index>(r);
    // Bring the lazily averaged row up to step t - 1 while θ was constant.
    const double prior = static_cast<double>(steps_ - 1);
    const double factor = prior > 0.0 ? static_cast<double>(row_synced_[r]) / prior : 0.0;
    emb_avg.row(row) = emb.row(row) + (emb_avg.row(row) - emb.row(row)) * factor;
    emb.row(row) -= lr_ * params[0].grad.row(row);
    emb_avg.row(row) += (emb.row(row) - emb_avg.row(row)) / t;
    row_synced_[r] = steps_;
  }
}

EncoderModel AsgdOptimizer::averaged(const EncoderModel& model) const {
  EncoderModel out = model;
  if (steps_ == 0) return out;
  auto& params = out.parameters();
  for (std::size_t p = 1; p < params.size(); ++p) params[p].value = average_[p];
  auto& emb = params[0].value;
  const double t = static_cast<double>(steps_);
  for (Eigen::Index r = 0; r < emb.rows(); ++r) {
    const double factor = static_cast<double>(row_synced_[static_cast<std::size_t>(r)]) / t;
    emb.row(r) = emb.row(r) + (average_[0].row(r) - emb.row(r)) * factor;
  }
  return out;
}

// --- Training loop -------------------------------------------------------------

LocalMetrics dev_metrics(const EncoderModel& model, const TrainingTexts& dev) {
  const Matrix s = model.encode_all(dev.statements);
  const Matrix p = model.encode_all(dev.proofs);
  return evaluate_local_rows(dev.size(), [&](std::size_t i, std::span<double> out) {
    model.score_row(s, p, i, out);
  });
}

namespace {

class BatchSampler {
 public:
  BatchSampler(std::size_t n, Rng& rng) : order_(n), rng_(rng) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
  }

  // b distinct indices, uniformly: a partial Fisher-Yates over the pool.
  std::span<const std::size_t> draw(std::size_t b) {
    for (std::size_t i = 0; i < b; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(order_.size() - i));
      std::swap(order_[i], order_[j]);
    }
    return {order_.data(), b};
  }

 private:
  std::vector<std::size_t> order_;
  Rng& rng_;
};

void gather(const TrainingTexts& texts, std::span<const std::size_t> idx, TrainingTexts& batch) {
  batch.statements.clear();
  batch.proofs.clear();
  for (const auto i : idx) {
    batch.statements.push_back(texts.statements[i]);
    batch.proofs.push_back(texts.proofs[i]);
  }
}

double selection_value(const LocalMetrics& m, SelectionMetric metric) {
  return metric == SelectionMetric::DevMrrLocal ? m.mrr : m.accuracy;
}

}  // namespace

TrainResult train(EncoderModel model, const TrainingTexts& train_texts, const TrainingTexts& dev,
                  const TrainConfig& config, const std::function<void(const EpochLog&)>& on_epoch) {
  config.validate();
  if (train_texts.statements.size() != train_texts.proofs.size() ||
      dev.statements.size() != dev.proofs.size()) {
    throw DataError("statement and proof lists differ in length");
  }

  TrainResult result{model, 0, 0.0, {}};
  if (config.epochs == 0) return result;

  const std::size_t n = train_texts.size();
  if (n < config.batch_size) {
    throw DataError("training set has " + std::to_string(n) + " pairs, fewer than batch_size " +
                    std::to_string(config.batch_size));
  }
  const std::size_t steps_per_epoch = n / config.batch_size;

  Rng sampling_rng(static_cast<std::uint64_t>(config.seed));
  Rng dropout_rng(static_cast<std::uint64_t>(config.seed) ^ 0xd1b54a32d192ed03ULL);
  BatchSampler sampler(n, sampling_rng);
  AsgdOptimizer optimizer(model, config.lr, config.lr_decay);
  TrainingTexts batch;
  bool have_best = false;

  const auto take_step = [&](bool global) {
    gather(train_texts, sampler.draw(config.batch_size), batch);
    model.zero_grad();
    const double loss = global ? global_loss(model, batch.statements, batch.proofs, &dropout_rng)
                               : local_loss(model, batch.statements, batch.proofs, &dropout_rng);
    if (!std::isfinite(loss)) throw DivergenceError("diverged");
    optimizer.step(model);
    return loss;
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochLog entry;
    entry.epoch = epoch;
    entry.lr = optimizer.lr();
    double local_sum = 0.0, global_sum = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      local_sum += take_step(false);
      if (config.objective == Objective::HybridGlobal) global_sum += take_step(true);
    }
    optimizer.end_epoch();
    entry.step = optimizer.steps();
    entry.loss = local_sum / static_cast<double>(steps_per_epoch);
    entry.global_loss = global_sum / static_cast<double>(steps_per_epoch);

    if (epoch % config.eval_every == 0) {
      auto averaged = optimizer.averaged(model);
      if (dev.size() > 0) {
        entry.dev = dev_metrics(averaged, dev);
        const double value = selection_value(*entry.dev, config.selection_metric);
        if (!have_best || value > result.best_metric) {
          result.best = std::move(averaged);
          result.best_epoch = epoch;
          result.best_metric = value;
          have_best = true;
        }
      } else if (epoch == config.epochs) {
        result.best = std::move(averaged);
        result.best_epoch = epoch;
      }
    }
    if (on_epoch) on_epoch(entry);
    result.log.push_back(std::move(entry));
  }
  return result;
}

}  // namespace proofmatch
