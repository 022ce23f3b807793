#pragma once

#include <string_view>
#include <vector>

#include "attnlens/common.hpp"

namespace attnlens::detail {

enum class LexKind {
  Identifier,
  Keyword,
  Number,
  String,  // string and character literals, one token each
  Comment,
  Punct,
  LineContinuation,  // python backslash-newline
};

struct Lexeme {
  LexKind kind;
  std::size_t start;
  std::size_t end;
  bool generic = false;  // '<' ... '>' type-argument range (java/c#)

  std::string_view text(std::string_view source) const {
    return source.substr(start, end - start);
  }
};

// Splits `source` into lexemes. Java/C# `>>`-style tokens that close type
// argument lists are split into single '>' tokens and flagged `generic`.
// Throws ParseError on characters or literals the grammar cannot lex.
std::vector<Lexeme> lex(std::string_view source, Language language);

// Throws ParseError for the byte offset `position`.
[[noreturn]] void fail_at(std::string_view source, std::size_t position, const std::string& what);

const std::vector<std::string_view>& reserved_words(Language language);
const std::vector<std::string_view>& operator_table(Language language);
bool is_primitive_type(Language language, std::string_view text);
const std::vector<std::string_view>& primitive_types(Language language);

}  // namespace attnlens::detail
