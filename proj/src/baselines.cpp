#include "proofmatch/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "proofmatch/error.hpp"

namespace proofmatch {

namespace {

std::map<std::string, std::size_t> count_tokens(const TokenSequence& text) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : text) ++counts[t.str()];
  return counts;
}

}  // namespace

double dice_score(const TokenSequence& s, const TokenSequence& p) {
  if (s.empty() && p.empty()) throw DataError("empty texts");
  const auto sc = count_tokens(s);
  const auto pc = count_tokens(p);
  std::size_t common = 0;
  for (const auto& [token, count] : sc) {
    const auto it = pc.find(token);
    if (it != pc.end()) common += std::min(count, it->second);
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(s.size() + p.size());
}

double TfIdfModel::idf(const std::string& token) const {
  const auto it = df.find(token);
  const double count = it == df.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + count)) + 1.0;
}

double BowVector::norm() const {
  double sq = 0.0;
  for (const auto& [token, w] : entries) sq += w * w;
  return std::sqrt(sq);
}

TfIdfModel tfidf_fit(std::span<const TokenSequence> train_texts) {
  TfIdfModel model;
  model.n_docs = train_texts.size();
  for (const auto& text : train_texts) {
    std::unordered_set<std::string> distinct;
    for (const auto& t : text) distinct.insert(t.str());
    for (const auto& token : distinct) ++model.df[token];
  }
  return model;
}

BowVector tfidf_vector(const TfIdfModel& model, const TokenSequence& text) {
  BowVector v;
  for (const auto& [token, count] : count_tokens(text)) {
    v.entries.emplace_back(token, static_cast<double>(count) * model.idf(token));
  }
  const double norm = v.norm();
  if (norm > 0.0) {
    for (auto& [token, w] : v.entries) w /= norm;
  }
  return v;
}

double cosine(const BowVector& u, const BowVector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 0.0;
  double dot = 0.0;
  auto a = u.entries.begin();
  auto b = v.entries.begin();
  while (a != u.entries.end() && b != v.entries.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      dot += a->second * b->second;
      ++a;
      ++b;
    }
  }
  return dot / (nu * nv);
}

BaselineMethod parse_baseline_method(std::string_view name) {
  if (name == "dice") return BaselineMethod::Dice;
  if (name == "tfidf") return BaselineMethod::TfIdf;
  throw DataError("unknown baseline method \"" + std::string(name) + "\"");
}

BaselineScorer::BaselineScorer(BaselineMethod method, InputMode mode,
                               std::span<const TokenSequence> statements,
                               std::span<const TokenSequence> proofs, const TfIdfModel* model)
    : method_(method), n_(statements.size()) {
  if (statements.size() != proofs.size()) {
    throw DataError("statement and proof lists differ in length");
  }
  if (method == BaselineMethod::TfIdf && model == nullptr) {
    throw DataError("TF-IDF scoring needs a fitted model");
  }

  std::unordered_map<std::string, std::size_t> terms;
  const auto term_of = [&](const std::string& token) {
    return terms.emplace(token, terms.size()).first->second;
  };
  // Dice works on counts; TF-IDF on normalized weights. Either way a text
  // becomes a list of (term, value).
  const auto weigh = [&](const TokenSequence& raw, double& length) {
    const auto text = restrict_to(raw, mode);
    length = static_cast<double>(text.size());
    WeightedText out;
    if (method_ == BaselineMethod::Dice) {
      for (const auto& [token, count] : count_tokens(text)) {
        out.emplace_back(term_of(token), static_cast<double>(count));
      }
    } else {
      for (const auto& [token, w] : tfidf_vector(*model, text).entries) {
        out.emplace_back(term_of(token), w);
      }
    }
    return out;
  };

  statements_.reserve(n_);
  statement_lengths_.resize(n_);
  proof_lengths_.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) statements_.push_back(weigh(statements[i], statement_lengths_[i]));
  std::vector<WeightedText> proof_weights;
  proof_weights.reserve(n_);
  for (std::size_t j = 0; j < n_; ++j) proof_weights.push_back(weigh(proofs[j], proof_lengths_[j]));

  postings_.resize(terms.size());
  for (std::size_t j = 0; j < n_; ++j) {
    for (const auto& [term, value] : proof_weights[j]) postings_[term].push_back({j, value});
  }
}

void BaselineScorer::score_row(std::size_t i, std::span<double> row) const {
  std::fill(row.begin(), row.end(), 0.0);
  for (const auto& [term, value] : statements_[i]) {
    for (const auto& post : postings_[term]) {
      row[post.proof] += method_ == BaselineMethod::Dice ? std::min(value, post.value)
                                                          : value * post.value;
    }
  }
  if (method_ == BaselineMethod::Dice) {
    for (std::size_t j = 0; j < n_; ++j) {
      const double total = statement_lengths_[i] + proof_lengths_[j];
      // Empty under the mode restriction on both sides: no overlap, score 0.
      row[j] = total > 0.0 ? 2.0 * row[j] / total : 0.0;
    }
  }
}

ScoreMatrix score_matrix_baseline(BaselineMethod method, InputMode mode,
                                  std::span<const TokenSequence> statements,
                                  std::span<const TokenSequence> proofs, const TfIdfModel* model) {
  const BaselineScorer scorer(method, mode, statements, proofs, model);
  ScoreMatrix m(scorer.size());
  for (std::size_t i = 0; i < scorer.size(); ++i) scorer.score_row(i, m.row(i));
  return m;
}

}  // namespace proofmatch
