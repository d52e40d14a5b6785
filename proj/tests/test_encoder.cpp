#include <cmath>

#include "doctest.h"
#include "proofmatch/encoder.hpp"
#include "proofmatch/error.hpp"
#include "proofmatch/training.hpp"

using namespace proofmatch;

namespace {

EncoderConfig tiny_config() {
  EncoderConfig c;
  c.vocab_size = 20;
  c.embed_dim = 8;
  c.model_dim = 8;
  c.layers = 1;
  c.heads = 2;
  c.key_dim = 4;
  c.ffn_dim = 16;
  c.max_len = 16;
  return c;
}

std::vector<TokenIds> random_texts(Rng& rng, std::size_t count, std::size_t vocab) {
  std::vector<TokenIds> out(count);
  for (auto& t : out) {
    t.resize(3 + rng.below(5));
    for (auto& id : t) id = static_cast<std::int32_t>(rng.below(vocab));
  }
  return out;
}

}  // namespace

TEST_CASE("encode output has model width and is deterministic") {
  Rng rng(3);
  EncoderModel model(tiny_config(), rng);
  const TokenIds tokens{2, 5, 7};
  const auto a = model.encode(tokens);
  CHECK(a.size() == 8);
  CHECK(a == model.encode(tokens));
  CHECK_THROWS_AS(model.encode(TokenIds{}), DataError);
  CHECK_THROWS_AS(model.encode(TokenIds{25}), DataError);
}

TEST_CASE("score_all agrees with bilinear_score on encodings") {
  Rng rng(4);
  EncoderModel model(tiny_config(), rng);
  const auto s = random_texts(rng, 4, 20);
  const auto p = random_texts(rng, 4, 20);
  const auto m = model.score_all(s, p);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(m(i, j) == model.bilinear_score(model.encode(s[i]), model.encode(p[j])));
    }
  }
}

TEST_CASE("recorded forward matches plain encode") {
  Rng rng(5);
  EncoderModel model(tiny_config(), rng);
  const TokenIds tokens{1, 4, 4, 9, 3};
  TextTape tape;
  const auto recorded = encode_recorded(model, tokens, tape);
  CHECK((recorded - model.encode(tokens)).cwiseAbs().maxCoeff() < 1e-12);
}

namespace {

// Central differences on a few sampled coordinates of every parameter.
template <typename LossFn>
void check_gradients(EncoderModel& model, LossFn loss_fn, std::uint64_t seed) {
  model.zero_grad();
  // Fill every gradient buffer once; zero_grad leaves untouched rows alone.
  for (auto& p : model.parameters()) p.grad.setZero();
  loss_fn(model, true);
  std::vector<Matrix> analytic;
  for (const auto& p : model.parameters()) analytic.push_back(p.grad);

  Rng pick(seed);
  std::size_t checked = 0;
  double worst = 0.0;
  std::string worst_name;
  for (std::size_t k = 0; k < model.parameters().size(); ++k) {
    auto& param = model.parameters()[k];
    for (int rep = 0; rep < 6; ++rep) {
      const auto idx = static_cast<Eigen::Index>(pick.below(static_cast<std::uint64_t>(param.value.size())));
      const double g = analytic[k].data()[idx];
      const double saved = param.value.data()[idx];
      const double h = 1e-5;
      param.value.data()[idx] = saved + h;
      const double up = loss_fn(model, false);
      param.value.data()[idx] = saved - h;
      const double down = loss_fn(model, false);
      param.value.data()[idx] = saved;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(g), std::abs(numeric), 1e-6});
      const double rel = std::abs(g - numeric) / scale;
      if (rel > worst) {
        worst = rel;
        worst_name = param.name;
      }
      ++checked;
    }
  }
  INFO("worst parameter: " << worst_name);
  CHECK(checked >= 50);
  CHECK(worst < 1e-3);
}

}  // namespace

TEST_CASE("local_loss gradients match finite differences") {
  Rng rng(11);
  EncoderModel model(tiny_config(), rng);
  // Nonzero W so gradients reach the encoders.
  for (Eigen::Index i = 0; i < model.bilinear().value.size(); ++i) {
    model.bilinear().value.data()[i] = rng.uniform(-0.5, 0.5);
  }
  const auto s = random_texts(rng, 4, 20);
  const auto p = random_texts(rng, 4, 20);
  check_gradients(
      model,
      [&](EncoderModel& m, bool with_grad) {
        if (with_grad) return local_loss(m, s, p, nullptr);
        return local_loss(m.score_all(s, p)).loss;
      },
      17);
}

TEST_CASE("global_loss gradients match finite differences") {
  Rng rng(12);
  EncoderModel model(tiny_config(), rng);
  for (Eigen::Index i = 0; i < model.bilinear().value.size(); ++i) {
    model.bilinear().value.data()[i] = rng.uniform(-0.5, 0.5);
  }
  const auto s = random_texts(rng, 5, 20);
  const auto p = random_texts(rng, 5, 20);
  REQUIRE(global_loss(model.score_all(s, p)).loss > 0.0);
  check_gradients(
      model,
      [&](EncoderModel& m, bool with_grad) {
        if (with_grad) return global_loss(m, s, p, nullptr);
        return global_loss(m.score_all(s, p)).loss;
      },
      19);
}

TEST_CASE("bilinear score examples") {
  EncoderConfig c = tiny_config();
  c.embed_dim = c.model_dim = 4;
  c.key_dim = 2;
  EncoderModel model(c);
  model.bilinear().value = Matrix::Identity(4, 4);
  TextVector s(4), p(4);
  s << 1, 2, 3, 4;
  p << 0.5, -1, 2, 0;
  CHECK(model.bilinear_score(s, p) == doctest::Approx(4.5));
  model.bias().value(0, 0) = 0.25;
  CHECK(model.bilinear_score(TextVector::Zero(4), p) == 0.25);

  Rng rng(2);
  for (Eigen::Index i = 0; i < 16; ++i) model.bilinear().value.data()[i] = rng.normal();
  double expected = 0.25;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) expected += s(i) * model.bilinear().value(i, j) * p(j);
  }
  CHECK(std::abs(model.bilinear_score(s, p) - expected) < 1e-12);
}

TEST_CASE("single-token text pools to its final-layer vector") {
  Rng rng(6);
  EncoderModel model(tiny_config(), rng);
  const TokenIds one{7};
  TextTape tape;
  const auto pooled = encode_recorded(model, one, tape);
  CHECK((pooled - tape.output.row(0)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("duplicate proofs give duplicate columns") {
  Rng rng(7);
  EncoderModel model(tiny_config(), rng);
  const std::vector<TokenIds> s{{1, 2}, {3, 4, 5}};
  const std::vector<TokenIds> p{{6, 7}, {6, 7}};
  const auto m = model.score_all(s, p);
  CHECK(m(0, 0) == m(0, 1));
  CHECK(m(1, 0) == m(1, 1));
  const auto single = model.score_all(std::span(s).first(1), std::span(p).first(1));
  CHECK(single.size() == 1);
  CHECK(single(0, 0) == m(0, 0));
}

TEST_CASE("backward needs a forward pass; zero upstream leaves zero gradients") {
  Rng rng(8);
  EncoderModel model(tiny_config(), rng);
  ScoringPass unused(model);
  CHECK_THROWS_AS(unused.backward(ScoreMatrix(2)), std::logic_error);

  const std::vector<TokenIds> s{{1, 2}, {3}}, p{{4, 5, 6}, {7}};
  model.zero_grad();
  ScoringPass pass(model);
  pass.forward(s, p);
  pass.backward(ScoreMatrix(2, 0.0));
  for (const auto& param : model.parameters()) CHECK(param.grad.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dropout is inactive without an rng and changes outputs with one") {
  EncoderConfig c = tiny_config();
  c.dropout = 0.5;
  Rng rng(9);
  EncoderModel model(c, rng);
  const TokenIds tokens{1, 2, 3, 4};
  TextTape a, b;
  const auto plain = encode_recorded(model, tokens, a);
  CHECK((plain - model.encode(tokens)).cwiseAbs().maxCoeff() < 1e-12);
  Rng drop(1);
  const auto noisy = encode_recorded(model, tokens, b, &drop);
  CHECK((noisy - plain).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("config validation") {
  EncoderConfig c = tiny_config();
  c.embed_dim = 6;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = tiny_config();
  c.heads = 3;
  CHECK_THROWS_AS(c.validate(), DataError);
  c = tiny_config();
  c.dropout = 1.0;
  CHECK_THROWS_AS(c.validate(), DataError);
}
