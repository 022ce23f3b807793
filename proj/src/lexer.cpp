#include "lexer.hpp"

#include <algorithm>
#include <string>

#include "attnlens/code_parser.hpp"

namespace attnlens::detail {

namespace {

const std::vector<std::string_view> kJavaReserved = {
    "abstract", "assert",     "boolean",   "break",     "byte",      "case",
    "catch",    "char",       "class",     "const",     "continue",  "default",
    "do",       "double",     "else",      "enum",      "extends",   "final",
    "finally",  "float",      "for",       "goto",      "if",        "implements",
    "import",   "instanceof", "int",       "interface", "long",      "native",
    "new",      "package",    "private",   "protected", "public",    "return",
    "short",    "static",     "strictfp",  "super",     "switch",    "synchronized",
    "this",     "throw",      "throws",    "transient", "try",       "void",
    "volatile", "while",      "true",      "false",     "null",
};

const std::vector<std::string_view> kPythonReserved = {
    "False",  "None",   "True",    "and",      "as",     "assert", "async",
    "await",  "break",  "class",   "continue", "def",    "del",    "elif",
    "else",   "except", "finally", "for",      "from",   "global", "if",
    "import", "in",     "is",      "lambda",   "nonlocal", "not",  "or",
    "pass",   "raise",  "return",  "try",      "while",  "with",   "yield",
};

const std::vector<std::string_view> kCSharpReserved = {
    "abstract", "as",        "base",     "bool",      "break",     "byte",
    "case",     "catch",     "char",     "checked",   "class",     "const",
    "continue", "decimal",   "default",  "delegate",  "do",        "double",
    "else",     "enum",      "event",    "explicit",  "extern",    "false",
    "finally",  "fixed",     "float",    "for",       "foreach",   "goto",
    "if",       "implicit",  "in",       "int",       "interface", "internal",
    "is",       "lock",      "long",     "namespace", "new",       "null",
    "object",   "operator",  "out",      "override",  "params",    "private",
    "protected", "public",   "readonly", "ref",       "return",    "sbyte",
    "sealed",   "short",     "sizeof",   "stackalloc", "static",   "string",
    "struct",   "switch",    "this",     "throw",     "true",      "try",
    "typeof",   "uint",      "ulong",    "unchecked", "unsafe",    "ushort",
    "using",    "virtual",   "void",     "volatile",  "while",
};

const std::vector<std::string_view> kJavaPrimitives = {
    "boolean", "byte", "char", "short", "int", "long", "float", "double",
};

const std::vector<std::string_view> kCSharpPrimitives = {
    "bool", "byte", "char", "decimal", "double", "float", "int", "long",
    "object", "sbyte", "short", "string", "uint", "ulong", "ushort",
};

const std::vector<std::string_view> kNoPrimitives = {};

// Longest first within each table.
const std::vector<std::string_view> kJavaOperators = {
    ">>>=", "<<=", ">>=", ">>>", "...", "->", "::", "++", "--", "&&", "||", "==", "!=",
    "<=",   ">=",  "+=",  "-=",  "*=",  "/=", "&=", "|=", "^=", "%=", "<<", ">>", "(",
    ")",    "{",   "}",   "[",   "]",   ";",  ",",  ".",  "@",  "=",  ">",  "<",  "!",
    "~",    "?",   ":",   "+",   "-",   "*",  "/",  "&",  "|",  "^",  "%",
};

const std::vector<std::string_view> kCSharpOperators = {
    "<<=", ">>=", "?\?=", "->", "=>", "::", "??", "?.", "++", "--", "&&", "||", "==",
    "!=",  "<=",  ">=",  "+=", "-=", "*=", "/=", "&=", "|=", "^=", "%=", "<<", ">>",
    "(",   ")",   "{",   "}",  "[",  "]",  ";",  ",",  ".",  "=",  ">",  "<",  "!",
    "~",   "?",   ":",   "+",  "-",  "*",  "/",  "&",  "|",  "^",  "%",
};

const std::vector<std::string_view> kPythonOperators = {
    "**=", "//=", ">>=", "<<=", "...", "->", ":=", "**", "//", "==", "!=", "<>", "<=",
    ">=",  "<<",  ">>",  "+=",  "-=",  "*=", "/=", "%=", "&=", "|=", "^=", "@=", "(",
    ")",   "[",   "]",   "{",   "}",   ":",  ",",  ";",  ".",  "+",  "-",  "*",  "/",
    "%",   "&",   "|",   "^",   "~",   "<",  ">",  "=",  "@",
};

bool contains(const std::vector<std::string_view>& words, std::string_view word) {
  return std::find(words.begin(), words.end(), word) != words.end();
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool is_ident_start(char c, Language language) {
  const auto u = static_cast<unsigned char>(c);
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || u >= 0x80) return true;
  return language == Language::Java && c == '$';
}

bool is_ident_char(char c, Language language) {
  return is_ident_start(c, language) || is_digit(c);
}

class Lexer {
 public:
  Lexer(std::string_view source, Language language) : src_(source), lang_(language) {}

  std::vector<Lexeme> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (is_space(c)) {
        ++pos_;
        continue;
      }
      const std::size_t start = pos_;
      if (lang_ == Language::Python) {
        if (c == '#') {
          skip_to_eol();
          push(LexKind::Comment, start);
          continue;
        }
        if (c == '\\') {
          std::size_t p = pos_ + 1;
          if (p < src_.size() && src_[p] == '\r') ++p;
          if (p < src_.size() && src_[p] == '\n') {
            pos_ = p + 1;
            push(LexKind::LineContinuation, start);
            continue;
          }
          fail_at(src_, pos_, "stray backslash");
        }
      } else {
        if (c == '/' && peek(1) == '/') {
          skip_to_eol();
          push(LexKind::Comment, start);
          continue;
        }
        if (c == '/' && peek(1) == '*') {
          const auto close = src_.find("*/", pos_ + 2);
          if (close == std::string_view::npos) fail_at(src_, start, "unterminated block comment");
          pos_ = close + 2;
          push(LexKind::Comment, start);
          continue;
        }
        if (lang_ == Language::CSharp && c == '#' && at_line_start(pos_)) {
          skip_to_eol();
          push(LexKind::Comment, start);
          continue;
        }
      }

      if (lex_prefixed_string()) continue;
      if (is_ident_start(c, lang_) ||
          (lang_ == Language::CSharp && c == '@' && is_ident_start(peek(1), lang_))) {
        lex_identifier();
        continue;
      }
      if (is_digit(c) || (c == '.' && is_digit(peek(1)))) {
        lex_number();
        continue;
      }
      if (c == '"' || c == '\'') {
        lex_plain_string();
        continue;
      }
      if (lex_operator()) continue;
      fail_at(src_, pos_, std::string("unexpected character '") + c + "'");
    }
    return std::move(out_);
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  bool at_line_start(std::size_t p) const {
    while (p > 0) {
      const char c = src_[p - 1];
      if (c == '\n') return true;
      if (c != ' ' && c != '\t') return false;
      --p;
    }
    return true;
  }

  void skip_to_eol() {
    while (pos_ < src_.size() && src_[pos_] != '\n' && src_[pos_] != '\r') ++pos_;
  }

  void push(LexKind kind, std::size_t start) { out_.push_back({kind, start, pos_}); }

  void lex_identifier() {
    const std::size_t start = pos_;
    if (src_[pos_] == '@') ++pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_], lang_)) ++pos_;
    const auto word = src_.substr(start, pos_ - start);
    push(contains(reserved_words(lang_), word) ? LexKind::Keyword : LexKind::Identifier, start);
  }

  void lex_number() {
    const std::size_t start = pos_;
    const bool hex = src_[pos_] == '0' && (peek(1) == 'x' || peek(1) == 'X');
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (is_ident_char(c, Language::Python)) {
        const bool exponent = hex ? (c == 'p' || c == 'P') : (c == 'e' || c == 'E');
        ++pos_;
        if (exponent && (peek(0) == '+' || peek(0) == '-') && is_digit(peek(1))) pos_ += 2;
        continue;
      }
      if (c == '.') {
        const char next = peek(1);
        if (next == '.') break;
        if (is_digit(next) || !is_ident_start(next, lang_)) {
          ++pos_;
          continue;
        }
      }
      break;
    }
    push(LexKind::Number, start);
  }

  // Scans a quoted body starting at the opening quote at `pos_`.
  void scan_quoted(std::size_t token_start, bool raw_verbatim, bool interpolated) {
    const char quote = src_[pos_];
    const bool triple = lang_ != Language::CSharp && peek(1) == quote && peek(2) == quote &&
                        (lang_ == Language::Python || quote == '"');
    if (triple) {
      const std::string closing(3, quote);
      std::size_t p = pos_ + 3;
      while (true) {
        if (p >= src_.size()) fail_at(src_, token_start, "unterminated string literal");
        if (src_[p] == '\\') {
          p += 2;
          continue;
        }
        if (src_.compare(p, 3, closing) == 0) break;
        ++p;
      }
      pos_ = p + 3;
      push(LexKind::String, token_start);
      return;
    }
    std::size_t p = pos_ + 1;
    int holes = 0;
    while (true) {
      if (p >= src_.size()) fail_at(src_, token_start, "unterminated string literal");
      const char c = src_[p];
      if (raw_verbatim) {
        if (c == quote) {
          if (p + 1 < src_.size() && src_[p + 1] == quote) {
            p += 2;
            continue;
          }
          if (holes == 0) break;
        }
      } else {
        if (c == '\n') fail_at(src_, token_start, "unterminated string literal");
        if (c == '\\') {
          p += 2;
          continue;
        }
        if (c == quote && holes == 0) break;
      }
      if (interpolated) {
        if (c == '{') {
          if (p + 1 < src_.size() && src_[p + 1] == '{' && holes == 0) {
            p += 2;
            continue;
          }
          ++holes;
        } else if (c == '}' && holes > 0) {
          --holes;
        } else if (c == '"' && holes > 0) {
          // nested literal inside an interpolation hole
          std::size_t q = p + 1;
          while (q < src_.size() && src_[q] != '"') q += src_[q] == '\\' ? 2 : 1;
          p = q;
        }
      }
      ++p;
    }
    pos_ = p + 1;
    push(LexKind::String, token_start);
  }

  void lex_plain_string() {
    if (lang_ != Language::Python && src_[pos_] == '\'') {
      const std::size_t start = pos_;
      std::size_t p = pos_ + 1;
      while (true) {
        if (p >= src_.size() || src_[p] == '\n') fail_at(src_, start, "unterminated character literal");
        if (src_[p] == '\\') {
          p += 2;
          continue;
        }
        if (src_[p] == '\'') break;
        ++p;
      }
      pos_ = p + 1;
      push(LexKind::String, start);
      return;
    }
    scan_quoted(pos_, false, false);
  }

  bool lex_prefixed_string() {
    const std::size_t start = pos_;
    if (lang_ == Language::Python) {
      std::size_t p = pos_;
      while (p < src_.size() && p - pos_ < 2 && std::string_view("rRbBuUfF").find(src_[p]) != std::string_view::npos)
        ++p;
      if (p == pos_ || p >= src_.size() || (src_[p] != '"' && src_[p] != '\'')) return false;
      const auto prefix = ascii_lower(src_.substr(pos_, p - pos_));
      static const std::vector<std::string_view> kPrefixes = {"r", "u", "b", "f", "br", "rb", "fr", "rf"};
      if (!contains(kPrefixes, prefix)) return false;
      pos_ = p;
      scan_quoted(start, false, false);
      return true;
    }
    if (lang_ == Language::CSharp) {
      std::size_t p = pos_;
      bool verbatim = false;
      bool interpolated = false;
      while (p < src_.size() && p - pos_ < 2 && (src_[p] == '@' || src_[p] == '$')) {
        (src_[p] == '@' ? verbatim : interpolated) = true;
        ++p;
      }
      if (p == pos_ || p >= src_.size() || src_[p] != '"') return false;
      pos_ = p;
      scan_quoted(start, verbatim, interpolated);
      return true;
    }
    return false;
  }

  bool lex_operator() {
    for (const auto op : operator_table(lang_)) {
      if (src_.compare(pos_, op.size(), op) == 0) {
        const std::size_t start = pos_;
        pos_ += op.size();
        push(LexKind::Punct, start);
        return true;
      }
    }
    return false;
  }

  std::string_view src_;
  Language lang_;
  std::size_t pos_ = 0;
  std::vector<Lexeme> out_;
};

bool may_precede_type_arguments(const std::vector<Lexeme>& lexemes, std::size_t idx,
                                std::string_view src) {
  std::size_t p = idx;
  while (p > 0) {
    --p;
    const auto& prev = lexemes[p];
    if (prev.kind == LexKind::Comment) continue;
    if (prev.kind == LexKind::Identifier) return true;
    const auto text = prev.text(src);
    if (text == ".") return true;
    if (prev.kind == LexKind::Keyword) {
      static const std::vector<std::string_view> kModifiers = {
          "public", "private", "protected", "static", "final", "abstract", "synchronized",
          "native", "default", "strictfp", "internal", "virtual", "override", "sealed",
          "extern", "unsafe", "new", "readonly"};
      return contains(kModifiers, text);
    }
    return false;
  }
  return true;  // start of source: method type parameters
}

// Marks '<' ... '>' ranges that read as type arguments, splitting '>>' and
// '>>>' that close them.
void mark_generics(std::vector<Lexeme>& lexemes, std::string_view src, Language language) {
  static const std::vector<std::string_view> kAllowedPunct = {".", ",", "?", "&", "[", "]", "@", "::"};
  for (std::size_t i = 0; i < lexemes.size(); ++i) {
    if (lexemes[i].kind != LexKind::Punct || lexemes[i].text(src) != "<" || lexemes[i].generic) continue;
    if (!may_precede_type_arguments(lexemes, i, src)) continue;
    int depth = 1;
    std::size_t j = i + 1;
    bool ok = false;
    for (; j < lexemes.size(); ++j) {
      const auto& lx = lexemes[j];
      const auto text = lx.text(src);
      if (lx.kind == LexKind::Comment || lx.kind == LexKind::Identifier) continue;
      if (lx.kind == LexKind::Keyword) {
        if (is_primitive_type(language, text) || text == "extends" || text == "super" ||
            text == "void" || (language == Language::CSharp && (text == "in" || text == "out")))
          continue;
        break;
      }
      if (lx.kind != LexKind::Punct) break;
      if (text == "<") {
        ++depth;
        continue;
      }
      if (text == ">" || text == ">>" || text == ">>>") {
        depth -= static_cast<int>(text.size());
        if (depth == 0) {
          ok = true;
          break;
        }
        if (depth < 0) break;
        continue;
      }
      if (contains(kAllowedPunct, text)) continue;
      break;
    }
    if (!ok) continue;

    std::vector<Lexeme> range;
    for (std::size_t k = i; k <= j; ++k) {
      Lexeme lx = lexemes[k];
      const auto text = lx.text(src);
      if (lx.kind == LexKind::Punct && text.size() > 1 && text.find_first_not_of('>') == std::string_view::npos) {
        for (std::size_t c = 0; c < text.size(); ++c) {
          range.push_back({LexKind::Punct, lx.start + c, lx.start + c + 1, true});
        }
        continue;
      }
      lx.generic = true;
      range.push_back(lx);
    }
    const std::size_t added = range.size() - (j - i + 1);
    lexemes.erase(lexemes.begin() + static_cast<std::ptrdiff_t>(i),
                  lexemes.begin() + static_cast<std::ptrdiff_t>(j + 1));
    lexemes.insert(lexemes.begin() + static_cast<std::ptrdiff_t>(i), range.begin(), range.end());
    i = j + added;
  }
}

}  // namespace

void fail_at(std::string_view source, std::size_t position, const std::string& what) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < position && i < source.size(); ++i) {
    if (source[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  throw ParseError(position, line, column, what);
}

const std::vector<std::string_view>& reserved_words(Language language) {
  switch (language) {
    case Language::Java: return kJavaReserved;
    case Language::Python: return kPythonReserved;
    case Language::CSharp: return kCSharpReserved;
  }
  return kJavaReserved;
}

const std::vector<std::string_view>& operator_table(Language language) {
  switch (language) {
    case Language::Java: return kJavaOperators;
    case Language::Python: return kPythonOperators;
    case Language::CSharp: return kCSharpOperators;
  }
  return kJavaOperators;
}

const std::vector<std::string_view>& primitive_types(Language language) {
  switch (language) {
    case Language::Java: return kJavaPrimitives;
    case Language::CSharp: return kCSharpPrimitives;
    case Language::Python: return kNoPrimitives;
  }
  return kNoPrimitives;
}

bool is_primitive_type(Language language, std::string_view text) {
  return contains(primitive_types(language), text);
}

std::vector<Lexeme> lex(std::string_view source, Language language) {
  auto lexemes = Lexer(source, language).run();
  if (language != Language::Python) mark_generics(lexemes, source, language);
  return lexemes;
}

}  // namespace attnlens::detail
