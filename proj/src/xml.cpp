#include "proofmatch/xml.hpp"

#include <expat.h>

#include <memory>

#include "proofmatch/error.hpp"

namespace proofmatch {

std::optional<std::string_view> XmlNode::attribute(std::string_view name) const {
  for (const auto& [key, value] : attributes) {
    if (key == name) return std::string_view(value);
  }
  return std::nullopt;
}

namespace {

struct Builder {
  XmlNode root;
  std::vector<XmlNode*> stack;
  bool have_root = false;

  static void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
    auto& self = *static_cast<Builder*>(data);
    XmlNode node;
    node.tag = name;
    for (std::size_t i = 0; attrs[i] != nullptr; i += 2) {
      node.attributes.emplace_back(attrs[i], attrs[i + 1]);
    }
    if (self.stack.empty()) {
      self.root = std::move(node);
      self.have_root = true;
      self.stack.push_back(&self.root);
    } else {
      auto& parent = *self.stack.back();
      parent.children.push_back(std::move(node));
      self.stack.push_back(&parent.children.back());
    }
  }

  static void on_end(void* data, const XML_Char*) {
    static_cast<Builder*>(data)->stack.pop_back();
  }

  static void on_text(void* data, const XML_Char* s, int len) {
    auto& self = *static_cast<Builder*>(data);
    if (self.stack.empty()) return;
    auto& children = self.stack.back()->children;
    if (children.empty() || !children.back().is_text) {
      XmlNode text;
      text.is_text = true;
      children.push_back(std::move(text));
    }
    children.back().text.append(s, static_cast<std::size_t>(len));
  }
};

}  // namespace

XmlNode parse_xml(std::string_view document) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw DataError("cannot allocate XML parser");

  Builder builder;
  XML_SetUserData(parser.get(), &builder);
  XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
  XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);

  if (XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), 1) ==
      XML_STATUS_ERROR) {
    throw DataError(std::string("XML parse error: ") +
                    XML_ErrorString(XML_GetErrorCode(parser.get())) + " at line " +
                    std::to_string(XML_GetCurrentLineNumber(parser.get())));
  }
  if (!builder.have_root) throw DataError("XML document has no root element");
  return std::move(builder.root);
}

}  // namespace proofmatch
