#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "proofmatch/assignment.hpp"
#include "proofmatch/token.hpp"

namespace proofmatch {

// 2 |s ∩ p| / (|s| + |p|) with count-aware intersection. Throws DataError
// when both texts are empty.
double dice_score(const TokenSequence& s, const TokenSequence& p);

// Document frequencies estimated on training texts, each statement and each
// proof counted as one document.
struct TfIdfModel {
  std::unordered_map<std::string, std::size_t> df;
  std::size_t n_docs = 0;

  // ln((1 + N) / (1 + df)) + 1; unseen tokens use df = 0.
  double idf(const std::string& token) const;
};

// Sparse weights sorted by serialized token, no explicit zeros.
struct BowVector {
  std::vector<std::pair<std::string, double>> entries;

  double norm() const;
};

TfIdfModel tfidf_fit(std::span<const TokenSequence> train_texts);

// tf * idf with tf the raw count, then L2-normalized (left as is when the
// norm is zero, i.e. for an empty text).
BowVector tfidf_vector(const TfIdfModel& model, const TokenSequence& text);

// <u, v> / (|u| |v|), or 0 when either norm is zero.
double cosine(const BowVector& u, const BowVector& v);

enum class BaselineMethod { Dice, TfIdf };

BaselineMethod parse_baseline_method(std::string_view name);

// Scores every statement against every proof through an inverted index over
// the proofs, one row at a time. Texts are restricted to `mode` first; a
// text that becomes empty scores 0 against everything.
class BaselineScorer {
 public:
  // `model` is only used for TfIdf.
  BaselineScorer(BaselineMethod method, InputMode mode, std::span<const TokenSequence> statements,
                 std::span<const TokenSequence> proofs, const TfIdfModel* model = nullptr);

  std::size_t size() const { return n_; }
  void score_row(std::size_t i, std::span<double> row) const;

 private:
  struct Posting {
    std::size_t proof;
    double value;
  };
  using WeightedText = std::vector<std::pair<std::size_t, double>>;  // (term, value)

  BaselineMethod method_;
  std::size_t n_ = 0;
  std::vector<WeightedText> statements_;
  std::vector<double> statement_lengths_;
  std::vector<double> proof_lengths_;
  std::vector<std::vector<Posting>> postings_;  // by term id
};

ScoreMatrix score_matrix_baseline(BaselineMethod method, InputMode mode,
                                  std::span<const TokenSequence> statements,
                                  std::span<const TokenSequence> proofs,
                                  const TfIdfModel* model = nullptr);

}  // namespace proofmatch
