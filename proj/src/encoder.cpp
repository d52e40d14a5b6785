#include "proofmatch/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "proofmatch/error.hpp"

namespace proofmatch {

namespace {

constexpr double kNormEpsilon = 1e-5;

const char* slot_name(std::size_t slot) {
  static constexpr const char* kNames[] = {
      "query", "key", "value", "out", "out_bias",
      "norm1_gain", "norm1_bias",
      "ffn1", "ffn1_bias", "ffn2", "ffn2_bias",
      "norm2_gain", "norm2_bias"};
  return kNames[slot];
}

void glorot(Matrix& m, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-a, a);
}

void row_softmax(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    const double top = row.maxCoeff();
    row = (row.array() - top).exp();
    row /= row.sum();
  }
}

void layer_norm(const Matrix& x, const Parameter& gain, const Parameter& bias, Matrix& hat,
                Eigen::VectorXd& rstd, Matrix& out) {
  const auto cols = static_cast<double>(x.cols());
  hat.resize(x.rows(), x.cols());
  rstd.resize(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).sum() / cols;
    const double var = (x.row(r).array() - mean).square().sum() / cols;
    rstd(r) = 1.0 / std::sqrt(var + kNormEpsilon);
    hat.row(r) = (x.row(r).array() - mean) * rstd(r);
  }
  out = hat.array().rowwise() * gain.value.row(0).array();
  out.rowwise() += bias.value.row(0);
}

// Gradient through normalization; `upstream` is d(loss)/d(output).
Matrix layer_norm_backward(const Matrix& upstream, const Matrix& hat,
                           const Eigen::VectorXd& rstd, Parameter& gain, Parameter& bias) {
  gain.grad.row(0) += upstream.cwiseProduct(hat).colwise().sum();
  bias.grad.row(0) += upstream.colwise().sum();
  const Matrix dhat = upstream.array().rowwise() * gain.value.row(0).array();
  const auto cols = static_cast<double>(hat.cols());
  Matrix dx(hat.rows(), hat.cols());
  for (Eigen::Index r = 0; r < hat.rows(); ++r) {
    const double mean_d = dhat.row(r).sum() / cols;
    const double mean_dh = dhat.row(r).dot(hat.row(r)) / cols;
    dx.row(r) = rstd(r) * (dhat.row(r).array() - mean_d - hat.row(r).array() * mean_dh);
  }
  return dx;
}

Matrix dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Matrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < rate ? 0.0 : keep_scale;
  }
  return mask;
}

}  // namespace

void EncoderConfig::validate() const {
  if (vocab_size < 2) throw DataError("encoder vocabulary must hold at least PAD and UNK");
  if (layers == 0 || model_dim == 0 || heads == 0 || key_dim == 0 || ffn_dim == 0 ||
      max_len == 0) {
    throw DataError("encoder sizes must be positive");
  }
  if (embed_dim != model_dim) throw DataError("embed_dim must equal model_dim");
  if (model_dim % heads != 0) throw DataError("model_dim must be divisible by heads");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw DataError("dropout must lie in [0, 1)");
}

EncoderModel::EncoderModel(const EncoderConfig& config) : config_(config) {
  config_.validate();
  allocate();
}

EncoderModel::EncoderModel(const EncoderConfig& config, Rng& rng) : EncoderModel(config) {
  for (std::size_t p = 0; p < params_.size(); ++p) {
    auto& value = params_[p].value;
    if (p == 0) {
      // Unit variance after the sqrt(d) input scaling, level with the position table.
      const double sd = 1.0 / std::sqrt(static_cast<double>(config_.model_dim));
      for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = sd * rng.normal();
    } else if (&params_[p] == &bilinear()) {
      const double a = 1.0 / static_cast<double>(config_.model_dim);
      for (Eigen::Index i = 0; i < value.size(); ++i) value.data()[i] = rng.uniform(-a, a);
    } else if (value.rows() > 1) {
      glorot(value, rng);
    }
  }
}

void EncoderModel::allocate() {
  const auto d = static_cast<Eigen::Index>(config_.model_dim);
  const auto qk = static_cast<Eigen::Index>(config_.heads * config_.key_dim);
  const auto f = static_cast<Eigen::Index>(config_.ffn_dim);

  const auto add = [&](std::string name, Eigen::Index rows, Eigen::Index cols, double fill) {
    params_.push_back({std::move(name), Matrix::Constant(rows, cols, fill), Matrix::Zero(rows, cols)});
  };

  params_.clear();
  add("embedding", static_cast<Eigen::Index>(config_.vocab_size), d, 0.0);
  for (std::size_t l = 0; l < config_.layers; ++l) {
    const auto prefix = "layer" + std::to_string(l) + ".";
    const auto name = [&](std::size_t slot) { return prefix + slot_name(slot); };
    add(name(kQuery), d, qk, 0.0);
    add(name(kKey), d, qk, 0.0);
    add(name(kValue), d, d, 0.0);
    add(name(kOut), d, d, 0.0);
    add(name(kOutBias), 1, d, 0.0);
    add(name(kNorm1Gain), 1, d, 1.0);
    add(name(kNorm1Bias), 1, d, 0.0);
    add(name(kFfn1), d, f, 0.0);
    add(name(kFfn1Bias), 1, f, 0.0);
    add(name(kFfn2), f, d, 0.0);
    add(name(kFfn2Bias), 1, d, 0.0);
    add(name(kNorm2Gain), 1, d, 1.0);
    add(name(kNorm2Bias), 1, d, 0.0);
  }
  add("bilinear.weight", d, d, 0.0);
  add("bilinear.bias", 1, 1, 0.0);

  positions_ = Matrix::Zero(static_cast<Eigen::Index>(config_.max_len), d);
  if (config_.positional) {
    for (Eigen::Index pos = 0; pos < positions_.rows(); ++pos) {
      for (Eigen::Index i = 0; i < d; i += 2) {
        const double angle =
            static_cast<double>(pos) / std::pow(10000.0, static_cast<double>(i) / static_cast<double>(d));
        positions_(pos, i) = std::sin(angle);
        if (i + 1 < d) positions_(pos, i + 1) = std::cos(angle);
      }
    }
  }
  row_touched_.assign(config_.vocab_size, false);
  touched_rows_.clear();
}

Parameter& EncoderModel::parameter(const std::string& name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no parameter named " + name);
}

void EncoderModel::zero_grad() {
  const auto dense_start = params_.begin() + 1;
  for (auto it = dense_start; it != params_.end(); ++it) it->grad.setZero();
  auto& emb = params_[0].grad;
  for (const auto row : touched_rows_) {
    emb.row(static_cast<Eigen::Index>(row)).setZero();
    row_touched_[row] = false;
  }
  touched_rows_.clear();
}

void EncoderModel::touch_row(std::size_t row) {
  if (!row_touched_[row]) {
    row_touched_[row] = true;
    touched_rows_.push_back(row);
  }
}

bool EncoderModel::all_finite() const {
  for (const auto& p : params_) {
    if (!p.value.allFinite()) return false;
  }
  return true;
}

TextVector encode_recorded(const EncoderModel& model, std::span<const std::int32_t> tokens,
                           TextTape& tape, Rng* dropout_rng) {
  const auto& config = model.config();
  if (tokens.empty()) throw DataError("cannot encode empty text");
  if (tokens.size() > config.max_len) {
    throw DataError("text of " + std::to_string(tokens.size()) + " tokens exceeds max_len " +
                    std::to_string(config.max_len));
  }
  const auto len = static_cast<Eigen::Index>(tokens.size());
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  const auto dk = static_cast<Eigen::Index>(config.key_dim);
  const auto dv = static_cast<Eigen::Index>(config.value_dim());
  const double embed_scale = std::sqrt(static_cast<double>(config.model_dim));
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(config.key_dim));
  const bool use_dropout = dropout_rng != nullptr && config.dropout > 0.0;

  tape.tokens.assign(tokens.begin(), tokens.end());
  tape.layers.resize(config.layers);

  Matrix x(len, d);
  const auto& emb = model.embedding().value;
  for (Eigen::Index t = 0; t < len; ++t) {
    const auto id = tokens[static_cast<std::size_t>(t)];
    if (id < 0 || static_cast<std::size_t>(id) >= config.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " out of vocabulary range");
    }
    x.row(t) = embed_scale * emb.row(id) + model.positions().row(t);
  }

  for (std::size_t l = 0; l < config.layers; ++l) {
    auto& lt = tape.layers[l];
    const auto P = [&](EncoderModel::Slot s) -> const Matrix& { return model.layer_param(l, s).value; };

    lt.input = std::move(x);
    lt.query = lt.input * P(EncoderModel::kQuery);
    lt.key = lt.input * P(EncoderModel::kKey);
    lt.value = lt.input * P(EncoderModel::kValue);
    lt.attention.resize(config.heads);
    lt.heads.resize(len, d);
    for (std::size_t h = 0; h < config.heads; ++h) {
      const auto hq = static_cast<Eigen::Index>(h) * dk;
      const auto hv = static_cast<Eigen::Index>(h) * dv;
      auto& a = lt.attention[h];
      a.noalias() = lt.query.middleCols(hq, dk) * lt.key.middleCols(hq, dk).transpose();
      a *= attn_scale;
      row_softmax(a);
      lt.heads.middleCols(hv, dv).noalias() = a * lt.value.middleCols(hv, dv);
    }
    Matrix attn_out = lt.heads * P(EncoderModel::kOut);
    attn_out.rowwise() += P(EncoderModel::kOutBias).row(0);
    if (use_dropout) {
      lt.attn_mask = dropout_mask(len, d, config.dropout, *dropout_rng);
      attn_out = attn_out.cwiseProduct(lt.attn_mask);
    } else {
      lt.attn_mask.resize(0, 0);
    }
    layer_norm(lt.input + attn_out, model.layer_param(l, EncoderModel::kNorm1Gain),
               model.layer_param(l, EncoderModel::kNorm1Bias), lt.norm1_hat, lt.norm1_rstd,
               lt.norm1_out);

    lt.ffn_pre = lt.norm1_out * P(EncoderModel::kFfn1);
    lt.ffn_pre.rowwise() += P(EncoderModel::kFfn1Bias).row(0);
    lt.ffn_act = lt.ffn_pre.cwiseMax(0.0);
    Matrix ffn_out = lt.ffn_act * P(EncoderModel::kFfn2);
    ffn_out.rowwise() += P(EncoderModel::kFfn2Bias).row(0);
    if (use_dropout) {
      lt.ffn_mask = dropout_mask(len, d, config.dropout, *dropout_rng);
      ffn_out = ffn_out.cwiseProduct(lt.ffn_mask);
    } else {
      lt.ffn_mask.resize(0, 0);
    }
    layer_norm(lt.norm1_out + ffn_out, model.layer_param(l, EncoderModel::kNorm2Gain),
               model.layer_param(l, EncoderModel::kNorm2Bias), lt.norm2_hat, lt.norm2_rstd, x);
  }

  tape.output = std::move(x);
  tape.pooled_from.resize(static_cast<std::size_t>(d));
  TextVector pooled(d);
  for (Eigen::Index c = 0; c < d; ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < len; ++t) {
      if (tape.output(t, c) > tape.output(best, c)) best = t;
    }
    tape.pooled_from[static_cast<std::size_t>(c)] = best;
    pooled(c) = tape.output(best, c);
  }
  return pooled;
}

void backward_text(EncoderModel& model, const TextTape& tape, const TextVector& upstream) {
  const auto& config = model.config();
  const auto len = static_cast<Eigen::Index>(tape.tokens.size());
  const auto d = static_cast<Eigen::Index>(config.model_dim);
  const auto dk = static_cast<Eigen::Index>(config.key_dim);
  const auto dv = static_cast<Eigen::Index>(config.value_dim());
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(config.key_dim));

  Matrix dx = Matrix::Zero(len, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    dx(tape.pooled_from[static_cast<std::size_t>(c)], c) += upstream(c);
  }

  for (std::size_t l = config.layers; l-- > 0;) {
    const auto& lt = tape.layers[l];
    const auto P = [&](EncoderModel::Slot s) -> Parameter& { return model.layer_param(l, s); };

    // Feed-forward block.
    Matrix d_res2 = layer_norm_backward(dx, lt.norm2_hat, lt.norm2_rstd,
                                        P(EncoderModel::kNorm2Gain), P(EncoderModel::kNorm2Bias));
    Matrix d_norm1 = d_res2;
    Matrix d_ffn_out = lt.ffn_mask.size() > 0 ? Matrix(d_res2.cwiseProduct(lt.ffn_mask)) : d_res2;
    P(EncoderModel::kFfn2).grad.noalias() += lt.ffn_act.transpose() * d_ffn_out;
    P(EncoderModel::kFfn2Bias).grad.row(0) += d_ffn_out.colwise().sum();
    Matrix d_pre = d_ffn_out * P(EncoderModel::kFfn2).value.transpose();
    d_pre = d_pre.cwiseProduct((lt.ffn_pre.array() > 0.0).cast<double>().matrix());
    P(EncoderModel::kFfn1).grad.noalias() += lt.norm1_out.transpose() * d_pre;
    P(EncoderModel::kFfn1Bias).grad.row(0) += d_pre.colwise().sum();
    d_norm1.noalias() += d_pre * P(EncoderModel::kFfn1).value.transpose();

    // Attention block.
    Matrix d_res1 = layer_norm_backward(d_norm1, lt.norm1_hat, lt.norm1_rstd,
                                        P(EncoderModel::kNorm1Gain), P(EncoderModel::kNorm1Bias));
    Matrix d_attn_out = lt.attn_mask.size() > 0 ? Matrix(d_res1.cwiseProduct(lt.attn_mask)) : d_res1;
    P(EncoderModel::kOut).grad.noalias() += lt.heads.transpose() * d_attn_out;
    P(EncoderModel::kOutBias).grad.row(0) += d_attn_out.colwise().sum();
    const Matrix d_heads = d_attn_out * P(EncoderModel::kOut).value.transpose();

    Matrix dq(len, lt.query.cols()), dkey(len, lt.key.cols()), dval(len, d);
    for (std::size_t h = 0; h < config.heads; ++h) {
      const auto hq = static_cast<Eigen::Index>(h) * dk;
      const auto hv = static_cast<Eigen::Index>(h) * dv;
      const auto& a = lt.attention[h];
      const Matrix d_a = d_heads.middleCols(hv, dv) * lt.value.middleCols(hv, dv).transpose();
      dval.middleCols(hv, dv).noalias() = a.transpose() * d_heads.middleCols(hv, dv);
      const Eigen::VectorXd inner = d_a.cwiseProduct(a).rowwise().sum();
      Matrix d_s = a.cwiseProduct((d_a.colwise() - inner));
      d_s *= attn_scale;
      dq.middleCols(hq, dk).noalias() = d_s * lt.key.middleCols(hq, dk);
      dkey.middleCols(hq, dk).noalias() = d_s.transpose() * lt.query.middleCols(hq, dk);
    }
    P(EncoderModel::kQuery).grad.noalias() += lt.input.transpose() * dq;
    P(EncoderModel::kKey).grad.noalias() += lt.input.transpose() * dkey;
    P(EncoderModel::kValue).grad.noalias() += lt.input.transpose() * dval;

    dx = d_res1;
    dx.noalias() += dq * P(EncoderModel::kQuery).value.transpose();
    dx.noalias() += dkey * P(EncoderModel::kKey).value.transpose();
    dx.noalias() += dval * P(EncoderModel::kValue).value.transpose();
  }

  const double embed_scale = std::sqrt(static_cast<double>(config.model_dim));
  auto& emb = model.embedding().grad;
  for (Eigen::Index t = 0; t < len; ++t) {
    const auto id = static_cast<std::size_t>(tape.tokens[static_cast<std::size_t>(t)]);
    emb.row(static_cast<Eigen::Index>(id)) += embed_scale * dx.row(t);
    model.touch_row(id);
  }
}

TextVector EncoderModel::encode(std::span<const std::int32_t> tokens) const {
  TextTape tape;
  return encode_recorded(*this, tokens, tape, nullptr);
}

double EncoderModel::bilinear_score(const TextVector& s, const TextVector& p) const {
  const RowVector projected = s * bilinear().value;
  return projected.dot(p) + bias().value(0, 0);
}

Matrix EncoderModel::encode_all(std::span<const TokenIds> texts) const {
  Matrix out(static_cast<Eigen::Index>(texts.size()), static_cast<Eigen::Index>(config_.model_dim));
  for (std::size_t i = 0; i < texts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = encode(texts[i]);
  }
  return out;
}

void EncoderModel::score_row(const Matrix& statements, const Matrix& proofs, std::size_t i,
                             std::span<double> out) const {
  // Same expression as bilinear_score so both routes agree bit for bit.
  const RowVector projected = statements.row(static_cast<Eigen::Index>(i)) * bilinear().value;
  const double b = bias().value(0, 0);
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = projected.dot(proofs.row(static_cast<Eigen::Index>(j))) + b;
  }
}

namespace {

ScoreMatrix bilinear_matrix(const Matrix& s, const Matrix& p, const Matrix& w, double b) {
  const auto n = static_cast<std::size_t>(s.rows());
  ScoreMatrix m(n);
  Eigen::Map<Matrix> view(m.row(0).data(), s.rows(), p.rows());
  view.noalias() = s * w * p.transpose();
  view.array() += b;
  return m;
}

}  // namespace

ScoreMatrix EncoderModel::score_all(std::span<const TokenIds> statements,
                                    std::span<const TokenIds> proofs) const {
  if (statements.size() != proofs.size()) {
    throw DataError("statement and proof lists differ in length");
  }
  if (statements.empty()) return ScoreMatrix(0);
  const Matrix s = encode_all(statements);
  const Matrix p = encode_all(proofs);
  ScoreMatrix m(statements.size());
  for (std::size_t i = 0; i < statements.size(); ++i) score_row(s, p, i, m.row(i));
  return m;
}

ScoreMatrix ScoringPass::forward(std::span<const TokenIds> statements,
                                 std::span<const TokenIds> proofs, Rng* dropout_rng) {
  if (statements.size() != proofs.size()) {
    throw DataError("statement and proof lists differ in length");
  }
  const auto n = static_cast<Eigen::Index>(statements.size());
  const auto d = static_cast<Eigen::Index>(model_.config().model_dim);
  statement_tapes_.resize(statements.size());
  proof_tapes_.resize(proofs.size());
  statement_vectors_.resize(n, d);
  proof_vectors_.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    statement_vectors_.row(i) =
        encode_recorded(model_, statements[k], statement_tapes_[k], dropout_rng);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto k = static_cast<std::size_t>(j);
    proof_vectors_.row(j) = encode_recorded(model_, proofs[k], proof_tapes_[k], dropout_rng);
  }
  recorded_ = true;
  if (n == 0) return ScoreMatrix(0);
  return bilinear_matrix(statement_vectors_, proof_vectors_, model_.bilinear().value,
                         model_.bias().value(0, 0));
}

void ScoringPass::backward(const ScoreMatrix& upstream) {
  if (!recorded_) throw std::logic_error("backward called before forward");
  const auto n = statement_vectors_.rows();
  if (static_cast<Eigen::Index>(upstream.size()) != n) {
    throw std::logic_error("upstream gradient shape differs from the recorded batch");
  }
  if (n == 0) return;
  const Eigen::Map<const Matrix> dm(upstream.row(0).data(), n, n);
  const auto& w = model_.bilinear().value;

  model_.bilinear().grad.noalias() += statement_vectors_.transpose() * dm * proof_vectors_;
  model_.bias().grad(0, 0) += dm.sum();
  const Matrix d_statements = dm * proof_vectors_ * w.transpose();
  const Matrix d_proofs = dm.transpose() * statement_vectors_ * w;

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    backward_text(model_, statement_tapes_[k], d_statements.row(i));
    backward_text(model_, proof_tapes_[k], d_proofs.row(i));
  }
}

}  // namespace proofmatch
