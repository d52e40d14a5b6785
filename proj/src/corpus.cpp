#include "proofmatch/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "proofmatch/error.hpp"
#include "proofmatch/rng.hpp"

namespace proofmatch {

using ordered_json = nlohmann::ordered_json;

Split parse_split(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "dev") return Split::Dev;
  if (name == "test") return Split::Test;
  throw DataError("unknown split \"" + std::string(name) + "\"");
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Dev: return "dev";
    case Split::Test: return "test";
  }
  return "train";
}

std::vector<const StatementProofPair*> PairCorpus::select(Split which) const {
  std::vector<const StatementProofPair*> out;
  for (const auto& pair : pairs) {
    const auto it = split.find(pair.id);
    if (it != split.end() && it->second == which) out.push_back(&pair);
  }
  return out;
}

std::vector<StatementProofPair> filter_pairs(std::vector<StatementProofPair> pairs,
                                             std::size_t min_len, std::size_t max_len) {
  const auto in_range = [&](const TokenSequence& text) {
    return text.size() >= min_len && text.size() <= max_len;
  };
  std::erase_if(pairs, [&](const StatementProofPair& p) {
    return !(in_range(p.statement) && in_range(p.proof));
  });
  return pairs;
}

SplitAssignment shuffle_and_split(const std::vector<StatementProofPair>& pairs,
                                  std::int64_t seed) {
  const std::size_t n = pairs.size();
  if (n < 10) throw DataError("corpus too small to split");

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const auto& p : pairs) ids.push_back(p.id);

  Rng rng(static_cast<std::uint64_t>(seed));
  rng.shuffle(std::span<std::string>(ids));

  const std::size_t train_end = n * 8 / 10;
  const std::size_t dev_end = n * 9 / 10;

  SplitAssignment out;
  out.seed = seed;
  out.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(train_end));
  out.dev.assign(ids.begin() + static_cast<std::ptrdiff_t>(train_end),
                 ids.begin() + static_cast<std::ptrdiff_t>(dev_end));
  out.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(dev_end), ids.end());
  return out;
}

PairCorpus apply_split(std::vector<StatementProofPair> pairs, const SplitAssignment& split) {
  PairCorpus corpus;
  std::unordered_set<std::string> known;
  for (const auto& p : pairs) known.insert(p.id);

  const auto label = [&](const std::vector<std::string>& ids, Split which) {
    for (const auto& id : ids) {
      if (!known.contains(id)) {
        throw DataError("split references unknown pair id \"" + id + "\"");
      }
      if (!corpus.split.emplace(id, which).second) {
        throw DataError("pair id \"" + id + "\" appears in more than one split");
      }
    }
  };
  label(split.train, Split::Train);
  label(split.dev, Split::Dev);
  label(split.test, Split::Test);
  if (corpus.split.size() != known.size()) {
    throw DataError("split does not cover every corpus pair");
  }
  corpus.pairs = std::move(pairs);
  return corpus;
}

// --- Vocabulary ------------------------------------------------------------

Vocabulary::Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) {
  entries_.reserve(tokens.size() + 2);
  entries_.push_back("<pad>");
  entries_.push_back("<unk>");
  for (const auto& t : tokens) {
    if (index_.contains(t) || t == "<pad>" || t == "<unk>") {
      throw DataError("duplicate vocabulary entry \"" + t + "\"");
    }
    index_.emplace(t, static_cast<std::int32_t>(entries_.size()));
    entries_.push_back(t);
  }
}

std::int32_t Vocabulary::lookup(const std::string& serialized) const {
  const auto it = index_.find(serialized);
  return it == index_.end() ? kUnk : it->second;
}

std::int32_t Vocabulary::lookup(const TypedToken& token) const {
  return lookup(token.str());
}

std::vector<std::int32_t> Vocabulary::encode(const TokenSequence& tokens) const {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(lookup(t));
  return ids;
}

Vocabulary build_vocabulary(const PairCorpus& corpus, std::size_t min_freq) {
  const auto train = corpus.select(Split::Train);
  if (train.empty()) throw DataError("cannot build a vocabulary from an empty train split");

  std::unordered_map<std::string, std::size_t> counts;
  for (const auto* pair : train) {
    for (const auto& t : pair->statement) ++counts[t.str()];
    for (const auto& t : pair->proof) ++counts[t.str()];
  }

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, count] : counts) {
    if (count >= min_freq) kept.emplace_back(token, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, count] : kept) tokens.push_back(std::move(token));
  return Vocabulary(tokens);
}

// --- JSONL I/O ---------------------------------------------------------------

namespace {

TokenSequence parse_tokens(const nlohmann::json& value, const char* field) {
  if (!value.is_array()) throw DataError(std::string("field \"") + field + "\" must be an array");
  TokenSequence out;
  out.reserve(value.size());
  for (const auto& item : value) {
    if (!item.is_string()) {
      throw DataError(std::string("field \"") + field + "\" must contain strings");
    }
    out.push_back(TypedToken::parse(item.get_ref<const std::string&>()));
  }
  return out;
}

std::string required_string(const nlohmann::json& object, const char* field) {
  const auto it = object.find(field);
  if (it == object.end() || !it->is_string()) {
    throw DataError(std::string("missing string field \"") + field + "\"");
  }
  return it->get<std::string>();
}

ordered_json token_array(const TokenSequence& tokens) {
  auto out = ordered_json::array();
  for (const auto& t : tokens) out.push_back(t.str());
  return out;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  return out;
}

}  // namespace

std::vector<StatementProofPair> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus " + path.string());

  std::vector<StatementProofPair> pairs;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto object = nlohmann::json::parse(line);
      if (!object.is_object()) throw DataError("expected a JSON object");
      StatementProofPair pair;
      pair.id = required_string(object, "id");
      pair.doc = required_string(object, "doc");
      if (!object.contains("statement") || !object.contains("proof")) {
        throw DataError("missing \"statement\" or \"proof\"");
      }
      pair.statement = parse_tokens(object["statement"], "statement");
      pair.proof = parse_tokens(object["proof"], "proof");
      if (!seen.insert(pair.id).second) {
        throw DataError("duplicate id \"" + pair.id + "\"");
      }
      pairs.push_back(std::move(pair));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

void save_pairs(const std::vector<StatementProofPair>& pairs, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  for (const auto& p : pairs) {
    ordered_json line;
    line["id"] = p.id;
    line["doc"] = p.doc;
    line["statement"] = token_array(p.statement);
    line["proof"] = token_array(p.proof);
    out << line.dump() << '\n';
  }
  if (!out) throw DataError("failed writing " + path.string());
}

PairCorpus load_corpus(const std::filesystem::path& path) {
  PairCorpus corpus;
  corpus.pairs = load_pairs(path);
  return corpus;
}

void save_corpus(const PairCorpus& corpus, const std::filesystem::path& path) {
  save_pairs(corpus.pairs, path);
}

SplitAssignment load_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open split file " + path.string());
  try {
    const auto object = nlohmann::json::parse(in);
    SplitAssignment split;
    split.seed = object.at("seed").get<std::int64_t>();
    split.train = object.at("train").get<std::vector<std::string>>();
    split.dev = object.at("dev").get<std::vector<std::string>>();
    split.test = object.at("test").get<std::vector<std::string>>();
    return split;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_split(const SplitAssignment& split, const std::filesystem::path& path) {
  ordered_json object;
  object["seed"] = split.seed;
  object["train"] = split.train;
  object["dev"] = split.dev;
  object["test"] = split.test;
  auto out = open_for_write(path);
  out << object.dump() << '\n';
}

}  // namespace proofmatch
