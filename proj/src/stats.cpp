#include "proofmatch/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace proofmatch {

Summary summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (const double v : values) sq += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

namespace {

SideStats side_stats(const std::vector<const TokenSequence*>& texts) {
  std::vector<double> both, text, math, proportion;
  for (const auto* t : texts) {
    const auto words = static_cast<double>(
        std::count_if(t->begin(), t->end(), [](const TypedToken& tok) { return tok.is_word(); }));
    const auto total = static_cast<double>(t->size());
    both.push_back(total);
    text.push_back(words);
    math.push_back(total - words);
    proportion.push_back(total > 0.0 ? (total - words) / total : 0.0);
  }
  return {summarize(both), summarize(text), summarize(math), summarize(proportion)};
}

nlohmann::ordered_json summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["min"] = s.min;
  j["max"] = s.max;
  j["mean"] = s.mean;
  j["sd"] = s.sd;
  return j;
}

nlohmann::ordered_json side_json(const SideStats& s) {
  nlohmann::ordered_json j;
  j["text+math"] = summary_json(s.both);
  j["text"] = summary_json(s.text);
  j["math"] = summary_json(s.math);
  j["math_proportion"] = summary_json(s.math_proportion);
  return j;
}

}  // namespace

CorpusStats corpus_stats(const std::vector<StatementProofPair>& pairs) {
  CorpusStats stats;
  stats.pairs = pairs.size();
  std::set<std::string> docs;
  std::vector<const TokenSequence*> statements, proofs;
  for (const auto& p : pairs) {
    docs.insert(p.doc);
    statements.push_back(&p.statement);
    proofs.push_back(&p.proof);
  }
  stats.documents = docs.size();
  stats.statements = side_stats(statements);
  stats.proofs = side_stats(proofs);
  return stats;
}

nlohmann::ordered_json to_json(const CorpusStats& stats) {
  nlohmann::ordered_json j;
  j["pairs"] = stats.pairs;
  j["documents"] = stats.documents;
  j["statements"] = side_json(stats.statements);
  j["proofs"] = side_json(stats.proofs);
  return j;
}

}  // namespace proofmatch
