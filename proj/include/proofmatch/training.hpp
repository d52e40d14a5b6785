#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "proofmatch/assignment.hpp"
#include "proofmatch/encoder.hpp"
#include "proofmatch/eval.hpp"

namespace proofmatch {

enum class Objective { Local, HybridGlobal };
enum class SelectionMetric { DevMrrLocal, DevAccLocal };

Objective parse_objective(std::string_view name);
std::string_view to_string(Objective objective);
SelectionMetric parse_selection_metric(std::string_view name);
std::string_view to_string(SelectionMetric metric);

struct TrainConfig {
  std::size_t batch_size = 60;
  std::size_t epochs = 400;
  double lr = 0.02;
  double lr_decay = 0.99;
  std::size_t eval_every = 20;
  Objective objective = Objective::Local;
  std::int64_t seed = 0;
  SelectionMetric selection_metric = SelectionMetric::DevMrrLocal;

  // Throws DataError: batch_size < 2, eval_every = 0 or not dividing epochs,
  // non-positive lr or decay.
  void validate() const;
};

// Loss value plus d(loss)/d(score matrix).
struct ScoreLoss {
  double loss = 0.0;
  ScoreMatrix upstream;
};

// In-batch softmax: sum_i -log softmax(M_i)_i, via log-sum-exp with a max
// shift. Throws DataError for fewer than 2 pairs.
ScoreLoss local_loss(const ScoreMatrix& m);

// Number of statements not assigned their own proof.
double structured_cost(const Assignment& predicted);

// M + (1 - I).
ScoreMatrix loss_augmented(const ScoreMatrix& m);

struct GlobalScoreLoss {
  double loss = 0.0;
  ScoreMatrix upstream;
  Assignment predicted;  // argmax of the loss-augmented matrix
};

// max(0, cost(Â) + score(Â, M) - score(I, M)) with Â = solve_dense(M + 1 - I).
// Â is held constant for the gradient: +1 on (i, Â(i)), -1 on (i, i) when
// the hinge is active, zero otherwise.
GlobalScoreLoss global_loss(const ScoreMatrix& m);

// Model-level losses: score the batch, take the loss, and accumulate its
// gradient into the model's buffers. Return the loss value.
double local_loss(EncoderModel& model, std::span<const TokenIds> statements,
                  std::span<const TokenIds> proofs, Rng* dropout_rng = nullptr);
double global_loss(EncoderModel& model, std::span<const TokenIds> statements,
                   std::span<const TokenIds> proofs, Rng* dropout_rng = nullptr);

// SGD on the live parameters with a running average of every iterate since
// step 1. Embedding rows that receive no gradient are averaged lazily: with
// the row fixed at θ since step s, the average at step t is
// θ + (avg_s - θ) * s / t.
class AsgdOptimizer {
 public:
  AsgdOptimizer(const EncoderModel& model, double lr, double lr_decay);

  // θ <- θ - lr g, then avg <- avg + (θ - avg) / t. Throws DivergenceError
  // ("diverged") on a non-finite gradient, before touching any parameter.
  void step(EncoderModel& model);
  void end_epoch() { lr_ *= lr_decay_; }

  double lr() const { return lr_; }
  std::size_t steps() const { return steps_; }

  // Copy of `model` carrying the averaged parameters (the live ones when no
  // step has been taken).
  EncoderModel averaged(const EncoderModel& model) const;

 private:
  double lr_;
  double lr_decay_;
  std::size_t steps_ = 0;
  std::vector<Matrix> average_;
  std::vector<std::size_t> row_synced_;
};

struct TrainingTexts {
  std::vector<TokenIds> statements;
  std::vector<TokenIds> proofs;
  std::size_t size() const { return statements.size(); }
};

struct EpochLog {
  std::size_t epoch = 0;
  std::size_t step = 0;
  double loss = 0.0;          // mean local loss per local step
  double global_loss = 0.0;   // mean global loss per global step (hybrid only)
  double lr = 0.0;            // rate used during this epoch
  std::optional<LocalMetrics> dev;
};

struct TrainResult {
  EncoderModel best;
  std::size_t best_epoch = 0;
  double best_metric = 0.0;
  std::vector<EpochLog> log;
};

// Local: epochs x floor(N/b) steps on local_loss, each batch b distinct
// pairs drawn uniformly. Hybrid: every local step is followed by one
// global step on a fresh batch. The learning rate decays after every epoch.
// Every eval_every epochs the averaged parameters are scored on `dev` with
// local decoding, and the best by the selection metric is kept (earliest
// wins ties). With no dev texts, the final averaged model is returned.
TrainResult train(EncoderModel model, const TrainingTexts& train_texts, const TrainingTexts& dev,
                  const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

// Local-decoding MRR and accuracy without materializing the score matrix.
LocalMetrics dev_metrics(const EncoderModel& model, const TrainingTexts& dev);

}  // namespace proofmatch
