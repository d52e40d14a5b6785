#include "proofmatch/extract.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

#include "proofmatch/error.hpp"

namespace proofmatch {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool is_div(const XmlNode& node) { return !node.is_text && local_name(node.tag) == "div"; }

std::string class_of(const XmlNode& node) {
  return lower_ascii(node.attribute("class").value_or(""));
}

void find_pairs_in(const XmlNode& node, const std::string& doc_id, std::vector<RawPair>& out) {
  const XmlNode* previous = nullptr;
  for (const auto& child : node.children) {
    if (child.is_text) continue;
    if (previous != nullptr && is_div(*previous) && is_div(child) &&
        class_of(*previous).find("theorem") != std::string::npos && class_of(child) == "proof") {
      out.push_back({previous, &child, doc_id});
    }
    previous = &child;
  }
  for (const auto& child : node.children) {
    if (!child.is_text) find_pairs_in(child, doc_id, out);
  }
}

void collect_math(const XmlNode& node, const std::string* font, TokenSequence& out) {
  const auto name = local_name(node.tag);
  if (name == "annotation" || name == "annotation-xml") return;

  std::string own_font;
  if (const auto variant = node.attribute("mathvariant")) {
    own_font = std::string(*variant);
    font = &own_font;
  }
  for (const auto& child : node.children) {
    if (!child.is_text) {
      collect_math(child, font, out);
      continue;
    }
    std::size_t i = 0;
    const auto& text = child.text;
    while (i < text.size()) {
      while (i < text.size() && is_space(text[i])) ++i;
      std::size_t j = i;
      while (j < text.size() && !is_space(text[j])) ++j;
      if (j > i) {
        const auto surface = text.substr(i, j - i);
        std::string leaf_font;
        if (font != nullptr) {
          leaf_font = *font;
        } else if (name == "mi" && utf8_length(surface) == 1) {
          leaf_font = "italic";
        } else {
          leaf_font = "normal";
        }
        out.push_back(TypedToken::math(std::move(leaf_font), surface));
      }
      i = j;
    }
  }
}

void linearize_into(const XmlNode& node, TokenSequence& out) {
  for (const auto& child : node.children) {
    if (child.is_text) {
      auto words = tokenize_text(child.text);
      out.insert(out.end(), std::make_move_iterator(words.begin()),
                 std::make_move_iterator(words.end()));
    } else if (local_name(child.tag) == "math") {
      auto symbols = linearize_mathml(child);
      out.insert(out.end(), std::make_move_iterator(symbols.begin()),
                 std::make_move_iterator(symbols.end()));
    } else {
      linearize_into(child, out);
    }
  }
}

// 100 frequent English function words.
constexpr std::array<std::string_view, 100> kStopwords = {
    "a",       "about", "above", "after", "again",   "against", "all",   "also",  "an",
    "and",     "any",   "are",   "as",    "at",      "be",      "been",  "before", "being",
    "below",   "between", "both", "but",  "by",      "can",     "could", "did",   "do",
    "does",    "each",  "either", "for",  "from",    "further", "had",   "has",   "have",
    "he",      "hence", "her",   "here",  "his",     "how",     "if",    "in",    "into",
    "is",      "it",    "its",   "let",   "may",     "more",    "most",  "must",  "no",
    "not",     "now",   "of",    "on",    "one",     "only",    "or",    "other", "our",
    "over",    "same",  "she",   "should", "since",  "so",      "some",  "such",  "than",
    "that",    "the",   "their", "them",  "then",    "there",   "therefore", "these", "they",
    "this",    "those", "thus",  "to",    "under",   "up",      "very",  "was",   "we",
    "were",    "what",  "when",  "where", "which",   "while",   "who",   "will",  "with",
    "would"};

}  // namespace

std::string_view local_name(std::string_view tag) {
  const auto colon = tag.rfind(':');
  return colon == std::string_view::npos ? tag : tag.substr(colon + 1);
}

std::vector<RawPair> find_pairs(const XmlNode& root, const std::string& doc_id) {
  std::vector<RawPair> out;
  // The root itself has no siblings, so only its descendants can pair up.
  find_pairs_in(root, doc_id, out);
  return out;
}

TokenSequence linearize_mathml(const XmlNode& math) {
  TokenSequence out;
  collect_math(math, nullptr, out);
  return out;
}

TokenSequence tokenize_text(std::string_view text) {
  static constexpr std::string_view kPunctuation = ".,;:!?()[]{}";
  TokenSequence out;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      out.push_back(TypedToken::word(lower_ascii(current)));
      current.clear();
    }
  };
  for (const char c : text) {
    if (is_space(c)) {
      flush();
    } else if (kPunctuation.find(c) != std::string_view::npos) {
      flush();
      out.push_back(TypedToken::word(std::string(1, c)));
    } else {
      current.push_back(c);
    }
  }
  flush();
  return out;
}

TokenSequence linearize_subtree(const XmlNode& node) {
  TokenSequence out;
  linearize_into(node, out);
  return out;
}

StatementProofPair extract_pair(const RawPair& raw, std::string id) {
  StatementProofPair pair;
  pair.id = std::move(id);
  pair.doc = raw.doc_id;
  pair.statement = linearize_subtree(*raw.statement);
  pair.proof = linearize_subtree(*raw.proof);
  return pair;
}

double stopword_ratio(const std::vector<StatementProofPair>& pairs) {
  static const std::unordered_set<std::string_view> stopwords(kStopwords.begin(), kStopwords.end());
  std::size_t words = 0;
  std::size_t hits = 0;
  const auto count = [&](const TokenSequence& text) {
    for (const auto& t : text) {
      if (!t.is_word()) continue;
      if (std::none_of(t.surface.begin(), t.surface.end(),
                       [](char c) { return std::isalpha(static_cast<unsigned char>(c)); })) {
        continue;
      }
      ++words;
      if (stopwords.contains(t.surface)) ++hits;
    }
  };
  for (const auto& p : pairs) {
    count(p.statement);
    count(p.proof);
  }
  return words == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(words);
}

std::vector<StatementProofPair> extract_document(std::string_view xml, const std::string& doc_id) {
  XmlNode root;
  try {
    root = parse_xml(xml);
  } catch (const DataError& e) {
    throw DataError(doc_id + ": " + e.what());
  }
  std::vector<StatementProofPair> pairs;
  const auto raw = find_pairs(root, doc_id);
  pairs.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    pairs.push_back(extract_pair(raw[i], doc_id + ":" + std::to_string(i)));
  }
  return pairs;
}

}  // namespace proofmatch
