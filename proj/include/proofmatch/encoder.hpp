#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "proofmatch/assignment.hpp"
#include "proofmatch/rng.hpp"

namespace proofmatch {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using TextVector = Eigen::RowVectorXd;
using TokenIds = std::vector<std::int32_t>;

struct EncoderConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 300;
  std::size_t layers = 2;
  std::size_t model_dim = 300;
  std::size_t heads = 4;
  std::size_t key_dim = 128;
  std::size_t ffn_dim = 600;
  std::size_t max_len = 500;
  double dropout = 0.0;
  bool positional = true;

  std::size_t value_dim() const { return model_dim / heads; }

  // Throws DataError on inconsistent sizes.
  void validate() const;

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

// Token-level self-attentive encoder with max-pooling, plus the bilinear
// head score(s, p) = s W p^T + b.
//
// Per layer (post-norm): X1 = LN(X + MHA(X)), X2 = LN(X1 + FFN(X1)) where
// MHA concatenates heads softmax(Q_h K_h^T / sqrt(d_k)) V_h and projects
// back to d, and FFN = ReLU(X W1 + b1) W2 + b2. Input is the embedding,
// scaled by sqrt(d), plus a sinusoidal position table.
class EncoderModel {
 public:
  // Parameter slots within a layer.
  enum Slot : std::size_t {
    kQuery, kKey, kValue, kOut, kOutBias,
    kNorm1Gain, kNorm1Bias,
    kFfn1, kFfn1Bias, kFfn2, kFfn2Bias,
    kNorm2Gain, kNorm2Bias,
    kSlotsPerLayer
  };

  // All parameters zero-filled (layer-norm gains one); used before loading.
  explicit EncoderModel(const EncoderConfig& config);

  // Random initialization: Glorot-uniform matrices, N(0, 1/d) embeddings,
  // zero biases, unit norm gains, small random W and b = 0.
  EncoderModel(const EncoderConfig& config, Rng& rng);

  const EncoderConfig& config() const { return config_; }

  std::vector<Parameter>& parameters() { return params_; }
  const std::vector<Parameter>& parameters() const { return params_; }
  Parameter& parameter(const std::string& name);

  Parameter& embedding() { return params_[0]; }
  const Parameter& embedding() const { return params_[0]; }
  Parameter& layer_param(std::size_t layer, Slot slot) {
    return params_[1 + layer * kSlotsPerLayer + slot];
  }
  const Parameter& layer_param(std::size_t layer, Slot slot) const {
    return params_[1 + layer * kSlotsPerLayer + slot];
  }
  Parameter& bilinear() { return params_[params_.size() - 2]; }
  const Parameter& bilinear() const { return params_[params_.size() - 2]; }
  Parameter& bias() { return params_.back(); }
  const Parameter& bias() const { return params_.back(); }

  const Matrix& positions() const { return positions_; }

  // Throws DataError("cannot encode empty text") on empty input and on
  // inputs longer than max_len or holding out-of-range ids.
  TextVector encode(std::span<const std::int32_t> tokens) const;

  double bilinear_score(const TextVector& s, const TextVector& p) const;

  // Each text encoded once; m_ij = bilinear_score(enc(s_i), enc(p_j)).
  ScoreMatrix score_all(std::span<const TokenIds> statements,
                        std::span<const TokenIds> proofs) const;

  // One row per text, in input order.
  Matrix encode_all(std::span<const TokenIds> texts) const;

  // Row i of the score matrix from stacked encodings.
  void score_row(const Matrix& statements, const Matrix& proofs, std::size_t i,
                 std::span<double> out) const;

  void zero_grad();

  // Embedding rows that received gradient since the last zero_grad(),
  // in first-touch order.
  const std::vector<std::size_t>& touched_rows() const { return touched_rows_; }
  void touch_row(std::size_t row);

  bool all_finite() const;

 private:
  void allocate();

  EncoderConfig config_;
  std::vector<Parameter> params_;
  Matrix positions_;
  std::vector<std::size_t> touched_rows_;
  std::vector<bool> row_touched_;
};

// Activations of one encoded text, kept for the backward pass.
struct LayerTape {
  Matrix input;
  Matrix query, key, value;
  std::vector<Matrix> attention;  // per head, rows sum to 1
  Matrix heads;
  Matrix attn_mask;
  Matrix norm1_hat;
  Eigen::VectorXd norm1_rstd;
  Matrix norm1_out;
  Matrix ffn_pre;
  Matrix ffn_act;
  Matrix ffn_mask;
  Matrix norm2_hat;
  Eigen::VectorXd norm2_rstd;
};

struct TextTape {
  TokenIds tokens;
  std::vector<LayerTape> layers;
  Matrix output;                          // final layer, one row per token
  std::vector<Eigen::Index> pooled_from;  // argmax row per coordinate
};

// Runs the encoder on one text, recording activations. Dropout masks are
// drawn from `dropout_rng` when it is non-null and the rate is positive.
TextVector encode_recorded(const EncoderModel& model, std::span<const std::int32_t> tokens,
                           TextTape& tape, Rng* dropout_rng = nullptr);

// Accumulates d(loss)/d(params) into the model's gradient buffers given
// d(loss)/d(pooled vector) for a recorded text.
void backward_text(EncoderModel& model, const TextTape& tape, const TextVector& upstream);

// One differentiable scoring pass over a batch: forward() builds the score
// matrix and records every activation; backward() pushes score gradients
// through the bilinear head and both encoders, accumulating into the
// model's gradient buffers.
class ScoringPass {
 public:
  explicit ScoringPass(EncoderModel& model) : model_(model) {}

  ScoreMatrix forward(std::span<const TokenIds> statements, std::span<const TokenIds> proofs,
                      Rng* dropout_rng = nullptr);

  // Throws std::logic_error when no forward pass has been recorded.
  void backward(const ScoreMatrix& upstream);

 private:
  EncoderModel& model_;
  std::vector<TextTape> statement_tapes_, proof_tapes_;
  Matrix statement_vectors_, proof_vectors_;
  bool recorded_ = false;
};

}  // namespace proofmatch
