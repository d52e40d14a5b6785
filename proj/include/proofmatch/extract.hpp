#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "proofmatch/corpus.hpp"
#include "proofmatch/token.hpp"
#include "proofmatch/xml.hpp"

namespace proofmatch {

// Two adjacent sibling divs: a theorem-like statement followed by its proof.
// Points into the document it was found in.
struct RawPair {
  const XmlNode* statement = nullptr;
  const XmlNode* proof = nullptr;
  std::string doc_id;
};

// Tag name without a namespace prefix ("m:math" -> "math").
std::string_view local_name(std::string_view tag);

// Every pair of consecutive sibling div elements (text between them is
// ignored) where the first class contains "theorem" and the second class is
// exactly "proof", both compared case-insensitively. Document order.
std::vector<RawPair> find_pairs(const XmlNode& root, const std::string& doc_id);

// Depth-first leaf collection of a <math> tree. Fonts come from the nearest
// enclosing mathvariant; otherwise a one-character <mi> is "italic" and
// everything else "normal". <annotation> and <annotation-xml> are skipped.
TokenSequence linearize_mathml(const XmlNode& math);

// Lowercases ASCII, splits on whitespace and separates .,;:!?()[]{}.
TokenSequence tokenize_text(std::string_view text);

// Document-order traversal: text nodes through tokenize_text, <math>
// subtrees through linearize_mathml.
TokenSequence linearize_subtree(const XmlNode& node);
StatementProofPair extract_pair(const RawPair& raw, std::string id);

// Fraction of alphabetic word tokens that are common English stopwords.
double stopword_ratio(const std::vector<StatementProofPair>& pairs);
inline constexpr double kEnglishStopwordThreshold = 0.30;

// Parses one document and extracts all of its pairs; ids are "<doc>:<index>".
// Throws DataError prefixed with the doc id when parsing fails.
std::vector<StatementProofPair> extract_document(std::string_view xml, const std::string& doc_id);

}  // namespace proofmatch
