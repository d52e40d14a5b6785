#include "proofmatch/token.hpp"

#include "proofmatch/error.hpp"

namespace proofmatch {

TypedToken TypedToken::word(std::string surface) {
  return {TokenKind::Word, std::move(surface), {}};
}

TypedToken TypedToken::math(std::string font, std::string surface) {
  return {TokenKind::Math, std::move(surface), std::move(font)};
}

TypedToken TypedToken::parse(std::string_view text) {
  if (text.starts_with("w:") && text.size() > 2) {
    return word(std::string(text.substr(2)));
  }
  if (text.starts_with("m:")) {
    const auto rest = text.substr(2);
    const auto colon = rest.find(':');
    if (colon != std::string_view::npos && colon > 0 && colon + 1 < rest.size()) {
      return math(std::string(rest.substr(0, colon)), std::string(rest.substr(colon + 1)));
    }
  }
  throw DataError("malformed token \"" + std::string(text) + "\"");
}

std::string TypedToken::str() const {
  if (is_word()) return "w:" + surface;
  return "m:" + font + ":" + surface;
}

InputMode parse_input_mode(std::string_view name) {
  if (name == "both") return InputMode::Both;
  if (name == "text") return InputMode::TextOnly;
  if (name == "math") return InputMode::MathOnly;
  throw DataError("unknown input mode \"" + std::string(name) + "\"");
}

std::string_view to_string(InputMode mode) {
  switch (mode) {
    case InputMode::Both: return "both";
    case InputMode::TextOnly: return "text";
    case InputMode::MathOnly: return "math";
  }
  return "both";
}

bool keeps(InputMode mode, const TypedToken& token) {
  switch (mode) {
    case InputMode::Both: return true;
    case InputMode::TextOnly: return token.is_word();
    case InputMode::MathOnly: return token.is_math();
  }
  return true;
}

TokenSequence restrict_to(const TokenSequence& tokens, InputMode mode) {
  TokenSequence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) {
    if (keeps(mode, t)) out.push_back(t);
  }
  return out;
}

}  // namespace proofmatch
