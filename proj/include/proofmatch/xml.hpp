#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace proofmatch {

// Minimal DOM: either an element (tag, attributes, children) or a text node.
// Mixed content keeps its document order; adjacent character data is merged.
struct XmlNode {
  bool is_text = false;
  std::string tag;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::string text;
  std::vector<XmlNode> children;

  std::optional<std::string_view> attribute(std::string_view name) const;
  bool is_element(std::string_view name) const { return !is_text && tag == name; }
};

// Parses a complete document and returns its root element. Throws
// DataError with the expat message and line on malformed input. Namespace
// prefixes are kept verbatim in tag names.
XmlNode parse_xml(std::string_view document);

}  // namespace proofmatch
