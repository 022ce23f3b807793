#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "attnlens/common.hpp"

namespace attnlens {

enum class Category {
  MethodName,
  InputVariable,
  MethodCall,
  LocalVariable,
  TypeIdentifier,
  LanguageKeyword,
  Other,
};

inline constexpr std::size_t kNumCategories = 7;
inline constexpr std::array<Category, kNumCategories> kAllCategories = {
    Category::MethodName,     Category::InputVariable,   Category::MethodCall,
    Category::LocalVariable,  Category::TypeIdentifier,  Category::LanguageKeyword,
    Category::Other,
};

std::string_view to_string(Category category);
Category parse_category(std::string_view text);  // throws Error(Parse)

struct CodeToken {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;  // exclusive
  Category category = Category::Other;
  std::size_t index = 0;

  bool operator==(const CodeToken&) const = default;
};

struct ComplexityProfile {
  std::size_t n_tokens = 0;
  std::size_t cyclomatic = 1;
  std::size_t nested_block_depth = 0;
  std::size_t n_variables = 0;

  bool operator==(const ComplexityProfile&) const = default;
};

// Thrown for source that is not a single well-formed method definition.
class ParseError : public Error {
 public:
  ParseError(std::size_t position, std::size_t line, std::size_t column, const std::string& what);

  std::size_t position() const noexcept { return position_; }
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t position_;
  std::size_t line_;
  std::size_t column_;
};

// Leaf tokens of a single method/function, comments included. Categories are
// left at Other. Gaps between consecutive tokens contain only whitespace.
std::vector<CodeToken> tokenize(std::string_view source, Language language);

// Tokens with categories assigned.
std::vector<CodeToken> categorize(std::string_view source, Language language);

ComplexityProfile complexity_metrics(std::string_view source, Language language);
// Same, reusing an already categorized token list for `source`.
ComplexityProfile complexity_metrics(std::string_view source, Language language,
                                     const std::vector<CodeToken>& categorized);

// The per-language control-token table used for LanguageKeyword.
const std::vector<std::string_view>& keyword_table(Language language);
bool in_keyword_table(Language language, std::string_view text);
// True when the built-in lexer treats `text` as a reserved word.
bool is_grammar_keyword(Language language, std::string_view text);

struct GrammarInfo {
  std::string name;
  std::string version;
  std::uint64_t checksum;
};

// Identity of the built-in grammars; matches the committed grammars.lock.
std::vector<GrammarInfo> builtin_grammars();

}  // namespace attnlens
