#pragma once

#include <compare>
#include <string>
#include <string_view>
#include <vector>

namespace proofmatch {

enum class TokenKind { Word, Math };

// Atomic unit of every text. Identity is (kind, surface, font), so the word
// and math vocabularies never overlap and a bold `x` differs from an italic
// one. Serialized as "w:<surface>" or "m:<font>:<surface>".
struct TypedToken {
  TokenKind kind = TokenKind::Word;
  std::string surface;
  std::string font;  // empty for words

  static TypedToken word(std::string surface);
  static TypedToken math(std::string font, std::string surface);

  // Throws DataError on strings that are not in either serialized form.
  static TypedToken parse(std::string_view text);
  std::string str() const;

  bool is_word() const { return kind == TokenKind::Word; }
  bool is_math() const { return kind == TokenKind::Math; }

  friend auto operator<=>(const TypedToken&, const TypedToken&) = default;
  friend bool operator==(const TypedToken&, const TypedToken&) = default;
};

using TokenSequence = std::vector<TypedToken>;

// Which token kinds a task variation sees.
enum class InputMode { Both, TextOnly, MathOnly };

InputMode parse_input_mode(std::string_view name);
std::string_view to_string(InputMode mode);

bool keeps(InputMode mode, const TypedToken& token);
TokenSequence restrict_to(const TokenSequence& tokens, InputMode mode);

}  // namespace proofmatch
