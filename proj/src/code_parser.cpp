#include "attnlens/code_parser.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "lexer.hpp"

namespace attnlens {

namespace {

using detail::fail_at;
using detail::Lexeme;
using detail::LexKind;

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

const std::vector<std::string_view> kJavaKeywordTable = {
    "if",       "else",      "switch",       "case",      "while",      "class",
    "enum",     "interface", "annotation",   "public",    "protected",  "private",
    "static",   "abstract",  "final",        "native",    "synchronized", "transient",
    "volatile", "strictfp",  "assert",       "return",    "throw",      "try",
    "catch",    "finally",   "default",      "super",     "do",         "for",
    "break",    "continue",  "void",         "import",    "extends",    "implements",
    "instanceof", "new",     "null",         "package",   "this",       "throws",
};

const std::vector<std::string_view> kPythonKeywordTable = {
    "False",  "None",   "True",    "and",      "as",       "assert", "async",
    "await",  "break",  "class",   "continue", "def",      "del",    "elif",
    "else",   "except", "finally", "for",      "from",     "global", "if",
    "import", "in",     "is",      "lambda",   "nonlocal", "not",    "or",
    "pass",   "raise",  "return",  "try",      "while",    "with",   "yield",
};

const std::vector<std::string_view>& csharp_keyword_table() {
  static const std::vector<std::string_view> table = [] {
    std::vector<std::string_view> out;
    for (const auto word : detail::reserved_words(Language::CSharp)) {
      if (detail::is_primitive_type(Language::CSharp, word) || word == "true" || word == "false") continue;
      out.push_back(word);
    }
    return out;
  }();
  return table;
}

bool contains(const std::vector<std::string_view>& words, std::string_view word) {
  return std::find(words.begin(), words.end(), word) != words.end();
}

const std::vector<std::string_view> kJavaModifiers = {
    "public", "private", "protected", "static", "final", "abstract", "synchronized",
    "native", "strictfp", "transient", "volatile", "default",
};

const std::vector<std::string_view> kCSharpModifiers = {
    "public", "private", "protected", "internal", "static", "virtual", "override", "abstract",
    "sealed", "extern", "unsafe", "new", "readonly", "async", "partial", "ref",
};

const std::vector<std::string_view> kPythonCompound = {
    "if", "elif", "else", "for", "while", "try", "except", "finally", "with", "def", "class",
};

// Structural view of one method over the significant (non-comment) lexemes.
class MethodAnalysis {
 public:
  MethodAnalysis(std::string_view source, Language language)
      : src_(source), lang_(language), lx_(detail::lex(source, language)) {
    for (std::size_t i = 0; i < lx_.size(); ++i) {
      if (lx_[i].kind != LexKind::Comment && lx_[i].kind != LexKind::LineContinuation) sig_.push_back(i);
    }
    if (sig_.empty()) fail_at(src_, 0, "empty source");
    type_pos_.assign(lx_.size(), false);
    kwarg_.assign(lx_.size(), false);
    match_brackets();
    if (lang_ == Language::Python) {
      compute_python_lines();
      parse_python_header();
      collect_python_bindings();
    } else {
      match_generics();
      parse_curly_header();
      collect_curly_declarations();
    }
  }

  std::vector<CodeToken> tokens(bool with_categories) const {
    std::vector<CodeToken> out;
    out.reserve(lx_.size());
    std::vector<std::size_t> sig_of(lx_.size(), npos);
    for (std::size_t s = 0; s < sig_.size(); ++s) sig_of[sig_[s]] = s;
    for (std::size_t k = 0; k < lx_.size(); ++k) {
      CodeToken token;
      token.text = std::string(lx_[k].text(src_));
      token.char_start = lx_[k].start;
      token.char_end = lx_[k].end;
      token.index = out.size();
      if (with_categories) token.category = category_of(k, sig_of[k]);
      out.push_back(std::move(token));
    }
    return out;
  }

  std::size_t cyclomatic() const {
    std::size_t decisions = 0;
    for (std::size_t s = body_begin_; s < body_end_; ++s) {
      const auto t = text(s);
      const auto& lx = lx_[sig_[s]];
      if (lx.kind == LexKind::Keyword || lx.kind == LexKind::Punct) {
        switch (lang_) {
          case Language::Python:
            if (t == "if" || t == "elif" || t == "for" || t == "while" || t == "except" || t == "and" ||
                t == "or")
              ++decisions;
            break;
          case Language::Java:
          case Language::CSharp:
            if (t == "if" || t == "for" || t == "while" || t == "case" || t == "catch" || t == "&&" ||
                t == "||" || t == "foreach")
              ++decisions;
            else if (t == "?" && !lx.generic && is_ternary(s))
              ++decisions;
            break;
        }
      }
    }
    return 1 + decisions;
  }

  std::size_t nesting_depth() {
    max_depth_ = 0;
    if (lang_ == Language::Python) return python_depth();
    if (body_begin_ == body_end_) return 0;
    if (expression_body_) {
      generic_statement(body_begin_, 0);
    } else {
      block_contents(body_begin_, body_end_, 0);
    }
    return max_depth_;
  }

 private:
  // ---- token helpers -------------------------------------------------------

  std::string_view text(std::size_t s) const {
    return s < sig_.size() ? lx_[sig_[s]].text(src_) : std::string_view{};
  }
  LexKind kind(std::size_t s) const {
    return s < sig_.size() ? lx_[sig_[s]].kind : LexKind::Comment;
  }
  bool is_ident(std::size_t s) const { return s < sig_.size() && kind(s) == LexKind::Identifier; }
  bool is_punct(std::size_t s, std::string_view t) const {
    return s < sig_.size() && kind(s) == LexKind::Punct && text(s) == t;
  }
  bool is_kw(std::size_t s, std::string_view t) const {
    return s < sig_.size() && kind(s) == LexKind::Keyword && text(s) == t;
  }
  bool generic(std::size_t s) const { return s < sig_.size() && lx_[sig_[s]].generic; }

  [[noreturn]] void fail(std::size_t s, const std::string& what) const {
    fail_at(src_, s < sig_.size() ? lx_[sig_[s]].start : src_.size(), what);
  }

  void expect(std::size_t s, std::string_view t) const {
    if (text(s) != t || kind(s) == LexKind::String) fail(s, "expected '" + std::string(t) + "'");
  }

  std::size_t match(std::size_t s) const {
    if (s >= sig_.size() || match_[s] == npos) fail(s, "unbalanced bracket");
    return match_[s];
  }

  void match_brackets() {
    match_.assign(sig_.size(), npos);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < sig_.size(); ++s) {
      if (kind(s) != LexKind::Punct) continue;
      const auto t = text(s);
      if (t == "(" || t == "[" || t == "{") {
        stack.push_back(s);
      } else if (t == ")" || t == "]" || t == "}") {
        if (stack.empty()) fail(s, "unmatched '" + std::string(t) + "'");
        const auto open = text(stack.back());
        const bool ok = (open == "(" && t == ")") || (open == "[" && t == "]") || (open == "{" && t == "}");
        if (!ok) fail(s, "mismatched '" + std::string(t) + "'");
        match_[stack.back()] = s;
        match_[s] = stack.back();
        stack.pop_back();
      }
    }
    if (!stack.empty()) fail(stack.back(), "unclosed '" + std::string(text(stack.back())) + "'");
  }

  void match_generics() {
    generic_close_.assign(sig_.size(), npos);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < sig_.size(); ++s) {
      if (!generic(s)) continue;
      if (text(s) == "<") stack.push_back(s);
      if (text(s) == ">" && !stack.empty()) {
        generic_close_[stack.back()] = s;
        stack.pop_back();
      }
    }
  }

  bool is_call_at(std::size_t s) const {
    std::size_t next = s + 1;
    if (generic(next) && text(next) == "<" && generic_close_[next] != npos) next = generic_close_[next] + 1;
    return is_punct(next, "(");
  }

  // `Type name(` inside the body declares a method of a local or anonymous
  // class rather than calling one.
  bool declares_method_at(std::size_t s) const {
    if (s == 0) return false;
    const std::size_t p = s - 1;
    const auto t = text(p);
    if (is_ident(p)) return t != "await" && t != "yield" && t != "nameof";
    if (kind(p) == LexKind::Keyword) return t == "void" || detail::is_primitive_type(lang_, t);
    if (generic(p) && t == ">") return true;
    return t == "]" && p > 0 && text(p - 1) == "[";
  }

  bool in_body(std::size_t s) const { return s != npos && s >= body_begin_ && s < body_end_; }

  // ---- java / c# -----------------------------------------------------------

  // Parses a type expression starting at `s`; returns the position after it or
  // npos. Marks its identifiers as type positions when `mark` is set.
  std::size_t parse_type(std::size_t s, bool mark) {
    if (s >= sig_.size()) return npos;
    std::size_t q = s;
    if (kind(q) == LexKind::Keyword) {
      if (!detail::is_primitive_type(lang_, text(q)) && text(q) != "void") return npos;
      ++q;
    } else if (is_ident(q)) {
      const auto head = text(q);
      if (head == "await" || head == "yield") return npos;
      ++q;
      while (true) {
        if (generic(q) && text(q) == "<" && generic_close_[q] != npos) {
          q = generic_close_[q] + 1;
          continue;
        }
        if ((is_punct(q, ".") || is_punct(q, "::")) && is_ident(q + 1)) {
          q += 2;
          continue;
        }
        break;
      }
    } else {
      return npos;
    }
    while (true) {
      if (is_punct(q, "[")) {
        std::size_t r = q + 1;
        while (lang_ == Language::CSharp && is_punct(r, ",")) ++r;
        if (is_punct(r, "]")) {
          q = r + 1;
          continue;
        }
      }
      if (lang_ == Language::CSharp && is_punct(q, "?") && (is_ident(q + 1) || is_punct(q + 1, "["))) {
        ++q;
        continue;
      }
      break;
    }
    if (mark) {
      for (std::size_t r = s; r < q; ++r) {
        if (is_ident(r) || kind(r) == LexKind::Keyword) type_pos_[sig_[r]] = true;
      }
    }
    return q;
  }

  std::size_t skip_annotation(std::size_t s) const {
    // '@' Name ('.' Name)* [ '(' ... ')' ]
    std::size_t q = s + 1;
    if (!is_ident(q)) fail(q, "expected annotation name");
    ++q;
    while (is_punct(q, ".") && is_ident(q + 1)) q += 2;
    if (is_punct(q, "(")) q = match(q) + 1;
    return q;
  }

  void mark_generic_range(std::size_t open) {
    const auto close = generic_close_[open];
    for (std::size_t r = open; r <= close; ++r) {
      if (is_ident(r)) type_pos_[sig_[r]] = true;
    }
  }

  void parse_curly_header() {
    const auto& modifiers = lang_ == Language::Java ? kJavaModifiers : kCSharpModifiers;
    std::size_t p = 0;
    while (p < sig_.size()) {
      if (lang_ == Language::Java && is_punct(p, "@")) {
        p = skip_annotation(p);
        continue;
      }
      if (lang_ == Language::CSharp && is_punct(p, "[")) {
        p = match(p) + 1;
        continue;
      }
      const bool modifier_word = kind(p) == LexKind::Keyword ||
                                 (is_ident(p) && (text(p) == "async" || text(p) == "partial") && !is_punct(p + 1, "("));
      if (modifier_word && contains(modifiers, text(p))) {
        ++p;
        continue;
      }
      break;
    }
    if (generic(p) && text(p) == "<") {
      mark_generic_range(p);
      p = generic_close_[p] + 1;
    }
    if (is_ident(p) && is_punct(p + 1, "(")) {
      method_name_ = p;  // constructor
      ++p;
    } else {
      const auto q = parse_type(p, true);
      if (q == npos) fail(p, "expected method return type");
      p = q;
      if (!is_ident(p)) fail(p, "expected method name");
      while (is_punct(p + 1, ".") && is_ident(p + 2)) p += 2;  // explicit interface member
      method_name_ = p;
      ++p;
      if (generic(p) && text(p) == "<") {
        mark_generic_range(p);
        p = generic_close_[p] + 1;
      }
    }
    expect(p, "(");
    const auto close = match(p);
    parse_curly_params(p + 1, close);
    p = close + 1;
    while (lang_ == Language::Java && is_punct(p, "[") && is_punct(p + 1, "]")) p += 2;
    if (is_kw(p, "throws")) {
      ++p;
      while (true) {
        const auto q = parse_type(p, true);
        if (q == npos) fail(p, "expected exception type");
        p = q;
        if (!is_punct(p, ",")) break;
        ++p;
      }
    }
    if (lang_ == Language::CSharp) {
      if (is_punct(p, ":") && (is_kw(p + 1, "base") || is_kw(p + 1, "this"))) {
        p += 2;
        expect(p, "(");
        p = match(p) + 1;
      }
      while (is_ident(p) && text(p) == "where") {
        ++p;
        while (p < sig_.size() && !is_punct(p, "{") && !is_punct(p, "=>") && !is_punct(p, ";") &&
               !(is_ident(p) && text(p) == "where")) {
          if (is_ident(p)) type_pos_[sig_[p]] = true;
          p = is_punct(p, "(") ? match(p) + 1 : p + 1;
        }
      }
    }
    const std::size_t last = sig_.size() - 1;
    if (is_punct(p, "{")) {
      const auto end = match(p);
      if (end != last) fail(end + 1, "unexpected tokens after method body");
      body_begin_ = p + 1;
      body_end_ = end;
    } else if (lang_ == Language::CSharp && is_punct(p, "=>")) {
      if (!is_punct(last, ";") || last <= p + 1) fail(last, "expected ';' after expression body");
      body_begin_ = p + 1;
      body_end_ = last;
      expression_body_ = true;
    } else if (is_punct(p, ";")) {
      if (p != last) fail(p + 1, "unexpected tokens after method declaration");
      body_begin_ = body_end_ = p;
    } else {
      fail(p, "expected method body");
    }
  }

  void parse_curly_params(std::size_t begin, std::size_t end) {
    std::size_t seg = begin;
    while (seg < end) {
      std::size_t stop = seg;
      while (stop < end && !(is_punct(stop, ",") && !generic(stop))) {
        stop = (is_punct(stop, "(") || is_punct(stop, "[") || is_punct(stop, "{")) ? match(stop) + 1 : stop + 1;
      }
      std::size_t p = seg;
      while (p < stop) {
        if (lang_ == Language::Java && is_punct(p, "@")) {
          p = skip_annotation(p);
        } else if (lang_ == Language::CSharp && is_punct(p, "[")) {
          p = match(p) + 1;
        } else if (is_kw(p, "final") || is_kw(p, "ref") || is_kw(p, "out") || is_kw(p, "in") ||
                   is_kw(p, "params") || is_kw(p, "this")) {
          ++p;
        } else {
          break;
        }
      }
      if (p < stop) {
        auto q = parse_type(p, true);
        if (q == npos) fail(p, "expected parameter type");
        if (is_punct(q, "...")) ++q;
        if (is_kw(q, "this")) {
          // receiver parameter
        } else if (is_ident(q) && q < stop) {
          params_.insert(std::string(text(q)));
        } else {
          fail(q, "expected parameter name");
        }
      }
      seg = stop + 1;
    }
  }

  void declare(std::size_t s) { locals_.insert(std::string(text(s))); }

  bool declaration_context(std::size_t s) const {
    if (s == body_begin_) return true;
    const auto prev = s - 1;
    if (kind(prev) == LexKind::Punct) {
      const auto t = text(prev);
      return t == "{" || t == "}" || t == ";" || t == "(" || t == "," || t == ":";
    }
    if (kind(prev) == LexKind::Keyword) {
      const auto t = text(prev);
      return t == "final" || t == "out" || t == "ref" || t == "using" || t == "const" || t == "in";
    }
    return false;
  }

  void collect_curly_declarations() {
    for (std::size_t s = body_begin_; s < body_end_; ++s) {
      const auto t = text(s);
      const auto k = kind(s);
      if (k == LexKind::Keyword && t == "new") {
        parse_type(s + 1, true);
        continue;
      }
      if (k == LexKind::Keyword &&
          (t == "instanceof" || t == "throws" || t == "extends" || t == "implements" ||
           (lang_ == Language::CSharp && (t == "is" || t == "as")))) {
        const auto q = parse_type(s + 1, true);
        if (q != npos && (t == "instanceof" || t == "is") && is_ident(q) && !is_punct(q + 1, "(") &&
            !is_punct(q + 1, ".")) {
          declare(q);
        }
        continue;
      }
      if (k == LexKind::Keyword && t == "catch" && is_punct(s + 1, "(")) {
        std::size_t q = s + 2;
        while (true) {
          const auto r = parse_type(q, true);
          if (r == npos) break;
          q = r;
          if (!is_punct(q, "|")) break;
          ++q;
        }
        if (is_ident(q)) declare(q);
        continue;
      }
      if (k == LexKind::Punct && t == "." && (is_kw(s + 1, "class")) && s > body_begin_ && is_ident(s - 1)) {
        type_pos_[sig_[s - 1]] = true;
        continue;
      }
      if (k == LexKind::Identifier && (is_punct(s + 1, "->") || is_punct(s + 1, "=>"))) {
        declare(s);
        continue;
      }
      if (k == LexKind::Punct && t == "(") {
        const auto close = match(s);
        if (is_punct(close + 1, "->") || is_punct(close + 1, "=>")) {
          bool bare = true;
          for (std::size_t r = s + 1; r < close; ++r) {
            if (!(is_ident(r) || is_punct(r, ","))) bare = false;
          }
          if (bare) {
            for (std::size_t r = s + 1; r < close; ++r) {
              if (is_ident(r)) declare(r);
            }
          }
        }
        try_cast(s);
      }
      if ((k == LexKind::Identifier || k == LexKind::Keyword) && declaration_context(s)) {
        try_declaration(s);
      }
    }
  }

  void try_cast(std::size_t open) {
    if (open > body_begin_) {
      const auto prev = open - 1;
      if (is_ident(prev) || is_punct(prev, ")") || is_punct(prev, "]") || generic(prev)) return;
      if (kind(prev) == LexKind::Keyword) {
        const auto t = text(prev);
        if (t != "return" && t != "throw" && t != "case" && t != "else") return;
      }
      if (kind(prev) == LexKind::Number || kind(prev) == LexKind::String) return;
    }
    const auto q = parse_type(open + 1, false);
    if (q == npos || !is_punct(q, ")")) return;
    const auto next = q + 1;
    if (next >= body_end_) return;
    const auto nk = kind(next);
    const auto nt = text(next);
    const bool operand = nk == LexKind::Identifier || nk == LexKind::Number || nk == LexKind::String ||
                         nt == "(" || nt == "!" || nt == "~" || nt == "this" || nt == "new" ||
                         nt == "super" || nt == "base" || nt == "true" || nt == "false" || nt == "null";
    if (operand) parse_type(open + 1, true);
  }

  void try_declaration(std::size_t s) {
    const auto q = parse_type(s, false);
    if (q == npos || !is_ident(q)) return;
    const auto after = text(q + 1);
    const bool punct_follows = kind(q + 1) == LexKind::Punct &&
                               (after == "=" || after == ";" || after == "," || after == ":" || after == ")" ||
                                after == "[");
    const bool in_follows = lang_ == Language::CSharp && is_kw(q + 1, "in");
    if (!punct_follows && !in_follows) return;
    parse_type(s, true);
    declare(q);
    // further declarators: `int a = 1, b, c = f(x);`
    std::size_t r = q + 1;
    while (r < body_end_) {
      if (is_punct(r, ";") || is_punct(r, ")") || is_punct(r, ":") || is_punct(r, "}")) break;
      if (is_punct(r, "(") || is_punct(r, "[") || is_punct(r, "{")) {
        r = match(r) + 1;
        continue;
      }
      if (is_punct(r, ",") && !generic(r) && is_ident(r + 1) &&
          (is_punct(r + 2, "=") || is_punct(r + 2, ",") || is_punct(r + 2, ";") || is_punct(r + 2, "["))) {
        declare(r + 1);
      }
      ++r;
    }
  }

  bool is_ternary(std::size_t s) const {
    int depth = 0;
    for (std::size_t r = s + 1; r < sig_.size(); ++r) {
      const auto t = text(r);
      if (kind(r) != LexKind::Punct) continue;
      if (t == "(" || t == "[" || t == "{") ++depth;
      if (t == ")" || t == "]" || t == "}") {
        if (depth == 0) return false;
        --depth;
      }
      if (depth == 0 && (t == ";" || t == ",")) return false;
      if (depth == 0 && t == ":") return true;
    }
    return false;
  }

  // ---- nesting depth (java / c#) -------------------------------------------

  void note(std::size_t depth) { max_depth_ = std::max(max_depth_, depth); }

  void block_contents(std::size_t begin, std::size_t end, std::size_t depth) {
    std::size_t p = begin;
    while (p < end) {
      const auto next = statement(p, depth);
      p = next > p ? next : p + 1;
    }
  }

  // Parses a construct body `{...}` or single statement at `depth`.
  std::size_t body_at(std::size_t p, std::size_t depth) {
    note(depth);
    return statement(p, depth);
  }

  std::size_t after_parens(std::size_t p) const {
    if (!is_punct(p, "(")) return p;
    return match(p) + 1;
  }

  std::size_t statement(std::size_t p, std::size_t depth) {
    if (p >= body_end_) return p;
    const auto t = text(p);
    const auto k = kind(p);
    if (k == LexKind::Punct && t == "{") {
      const auto close = match(p);
      block_contents(p + 1, close, depth);
      return close + 1;
    }
    if (k == LexKind::Punct && t == ";") return p + 1;
    if (k == LexKind::Keyword) {
      if (t == "if") {
        auto q = body_at(after_parens(p + 1), depth + 1);
        if (is_kw(q, "else")) {
          if (is_kw(q + 1, "if")) return statement(q + 1, depth);
          return body_at(q + 1, depth + 1);
        }
        return q;
      }
      if (t == "for" || t == "while" || t == "foreach" || t == "synchronized" || t == "lock" ||
          t == "fixed" || (t == "using" && is_punct(p + 1, "("))) {
        return body_at(after_parens(p + 1), depth + 1);
      }
      if (t == "do") {
        auto q = body_at(p + 1, depth + 1);
        if (is_kw(q, "while")) q = after_parens(q + 1);
        if (is_punct(q, ";")) ++q;
        return q;
      }
      if (t == "try") {
        auto q = after_parens(p + 1);
        q = body_at(q, depth + 1);
        while (is_kw(q, "catch")) {
          q = after_parens(q + 1);
          if (is_ident(q) && text(q) == "when") q = after_parens(q + 1);
          q = body_at(q, depth + 1);
        }
        if (is_kw(q, "finally")) q = body_at(q + 1, depth + 1);
        return q;
      }
      if (t == "switch") {
        auto q = after_parens(p + 1);
        if (!is_punct(q, "{")) return generic_statement(p, depth);
        note(depth + 1);
        const auto close = match(q);
        switch_contents(q + 1, close, depth + 1);
        return close + 1;
      }
      if ((t == "checked" || t == "unchecked" || t == "unsafe") && is_punct(p + 1, "{")) {
        return body_at(p + 1, depth + 1);
      }
    }
    if (k == LexKind::Identifier && is_punct(p + 1, ":")) {
      return statement(p + 2, depth);  // label
    }
    return generic_statement(p, depth);
  }

  void switch_contents(std::size_t begin, std::size_t end, std::size_t depth) {
    std::size_t p = begin;
    while (p < end) {
      if (is_kw(p, "case") || is_kw(p, "default")) {
        std::size_t q = p + 1;
        while (q < end && !is_punct(q, ":") && !is_punct(q, "->")) {
          q = (is_punct(q, "(") || is_punct(q, "[")) ? match(q) + 1 : q + 1;
        }
        p = q + 1;
        continue;
      }
      const auto next = statement(p, depth);
      p = next > p ? next : p + 1;
    }
  }

  std::size_t generic_statement(std::size_t p, std::size_t depth) {
    int parens = 0;
    while (p < body_end_) {
      const auto t = text(p);
      if (kind(p) != LexKind::Punct) {
        ++p;
        continue;
      }
      if (t == "(" || t == "[") {
        ++parens;
      } else if (t == ")" || t == "]") {
        --parens;
      } else if (t == ";" && parens <= 0) {
        return p + 1;
      } else if (t == "}") {
        return p;
      } else if (t == "{") {
        const auto close = match(p);
        const auto prev = p > body_begin_ ? text(p - 1) : std::string_view{};
        const bool initializer = prev == "=" || prev == "]" || prev == "," || prev == "{" || prev == "(" ||
                                 prev == "return" || (p > body_begin_ && generic(p - 1));
        if (prev == "->" || prev == "=>") {
          note(depth + 1);
          block_contents(p + 1, close, depth + 1);
          p = close + 1;
          continue;
        }
        if (initializer) {
          p = close + 1;
          continue;
        }
        note(depth + 1);
        block_contents(p + 1, close, depth + 1);
        p = close + 1;
        const auto nt = text(p);
        if (parens <= 0 && !(nt == ")" || nt == ";" || nt == "," || nt == "." || nt == "]")) return p;
        continue;
      }
      ++p;
    }
    return p;
  }

  // ---- python --------------------------------------------------------------

  void compute_python_lines() {
    line_start_.assign(sig_.size(), false);
    int depth = 0;
    for (std::size_t s = 0; s < sig_.size(); ++s) {
      bool starts = s == 0;
      if (s > 0 && depth == 0) {
        // continuation tokens swallow their newline, so only newlines outside
        // them end the logical line
        std::size_t i = lx_[sig_[s - 1]].end;
        for (std::size_t k = sig_[s - 1] + 1; k <= sig_[s]; ++k) {
          for (; i < lx_[k].start; ++i) {
            if (src_[i] == '\n') starts = true;
          }
          i = lx_[k].end;
        }
      }
      line_start_[s] = starts;
      if (kind(s) == LexKind::Punct) {
        const auto t = text(s);
        if (t == "(" || t == "[" || t == "{") ++depth;
        if (t == ")" || t == "]" || t == "}") --depth;
      }
    }
  }

  std::size_t column(std::size_t s) const {
    const auto start = lx_[sig_[s]].start;
    std::size_t line_begin = start;
    while (line_begin > 0 && src_[line_begin - 1] != '\n') --line_begin;
    std::size_t col = 0;
    for (std::size_t i = line_begin; i < start; ++i) {
      col = src_[i] == '\t' ? (col / 8 + 1) * 8 : col + 1;
    }
    return col;
  }

  std::size_t next_line_start(std::size_t s) const {
    std::size_t q = s + 1;
    while (q < sig_.size() && !line_start_[q]) ++q;
    return q;
  }

  // First depth-0 ':' in [s, end) that is not a lambda's.
  std::size_t header_colon(std::size_t s, std::size_t end) const {
    int lambdas = 0;
    for (std::size_t q = s; q < end; ++q) {
      if (is_punct(q, "(") || is_punct(q, "[") || is_punct(q, "{")) {
        q = match(q);
        continue;
      }
      if (is_kw(q, "lambda")) ++lambdas;
      if (is_punct(q, ":")) {
        if (lambdas > 0) {
          --lambdas;
          continue;
        }
        return q;
      }
    }
    return npos;
  }

  void parse_python_header() {
    std::size_t p = 0;
    while (is_punct(p, "@")) {
      if (!line_start_[p]) fail(p, "decorator must start a line");
      p = next_line_start(p);
    }
    def_column_ = p < sig_.size() ? column(p) : 0;
    if (is_kw(p, "async")) ++p;
    if (!is_kw(p, "def")) fail(p, "expected 'def'");
    ++p;
    if (!is_ident(p)) fail(p, "expected function name");
    method_name_ = p;
    ++p;
    expect(p, "(");
    const auto close = match(p);
    parse_python_params(p + 1, close);
    p = close + 1;
    if (is_punct(p, "->")) {
      const auto colon = header_colon(p + 1, sig_.size());
      if (colon == npos) fail(p, "expected ':'");
      p = colon;
    }
    expect(p, ":");
    body_begin_ = p + 1;
    body_end_ = sig_.size();
    if (body_begin_ >= body_end_) fail(body_begin_, "expected function body");
  }

  void parse_python_params(std::size_t begin, std::size_t end) {
    std::size_t seg = begin;
    while (seg < end) {
      std::size_t stop = seg;
      while (stop < end && !is_punct(stop, ",")) {
        stop = (is_punct(stop, "(") || is_punct(stop, "[") || is_punct(stop, "{")) ? match(stop) + 1 : stop + 1;
      }
      std::size_t p = seg;
      while (p < stop && (is_punct(p, "*") || is_punct(p, "**"))) ++p;
      if (p < stop) {
        if (is_ident(p)) {
          params_.insert(std::string(text(p)));
        } else if (is_punct(p, "(")) {
          for (std::size_t r = p; r < match(p); ++r) {
            if (is_ident(r)) params_.insert(std::string(text(r)));
          }
        } else if (!is_punct(p, "/")) {
          fail(p, "expected parameter name");
        }
      }
      seg = stop + 1;
    }
  }

  void bind(std::size_t s) { locals_.insert(std::string(text(s))); }

  // Binds plain names in an assignment/for target list [begin, end).
  void bind_targets(std::size_t begin, std::size_t end) {
    for (std::size_t q = begin; q < end; ++q) {
      const bool opener = is_punct(q, "(") || is_punct(q, "[");
      if (opener && q > begin && (is_ident(q - 1) || is_punct(q - 1, ")") || is_punct(q - 1, "]"))) {
        q = match(q);  // subscript or call trailer
        continue;
      }
      if (!is_ident(q)) continue;
      if (q > begin && is_punct(q - 1, ".")) continue;
      if (is_punct(q + 1, ".") || is_punct(q + 1, "[") || is_punct(q + 1, "(")) continue;
      bind(q);
    }
  }

  // End of the simple statement starting at `s` (exclusive).
  std::size_t statement_end(std::size_t s, std::size_t limit) const {
    std::size_t q = s;
    while (q < limit) {
      if (q > s && line_start_[q]) break;
      if (is_punct(q, ";")) break;
      if (is_punct(q, "(") || is_punct(q, "[") || is_punct(q, "{")) {
        q = match(q) + 1;
        continue;
      }
      ++q;
    }
    return q;
  }

  void python_statement(std::size_t s, std::size_t end) {
    if (s >= end) return;
    const auto t = text(s);
    if (kind(s) == LexKind::Keyword) {
      std::size_t head = s;
      if (t == "async") ++head;
      const auto ht = text(head);
      if (contains(kPythonCompound, ht) && kind(head) == LexKind::Keyword) {
        const auto colon = header_colon(head, end);
        if (ht == "def" || ht == "class") {
          if (is_ident(head + 1)) bind(head + 1);
          if (ht == "def" && is_punct(head + 2, "(")) {
            const auto close = match(head + 2);
            for (std::size_t r = head + 3; r < close; ++r) {
              if (is_ident(r) && (is_punct(r - 1, "(") || is_punct(r - 1, ",") || is_punct(r - 1, "*") ||
                                  is_punct(r - 1, "**"))) {
                bind(r);
              }
            }
          }
        }
        if (ht == "except" && colon != npos) {
          // py2: `except E, e:`
          for (std::size_t r = head + 1; r < colon; ++r) {
            if (is_punct(r, "(") || is_punct(r, "[")) {
              r = match(r);
              continue;
            }
            if (is_punct(r, ",") && is_ident(r + 1) && r + 2 == colon) bind(r + 1);
          }
        }
        if (colon != npos && colon + 1 < end) {
          // inline suite
          std::size_t q = colon + 1;
          while (q < end) {
            const auto e = statement_end(q, end);
            python_statement(q, e);
            q = e + 1;
          }
        }
        return;
      }
      if (t == "import") {
        bind_import_names(s + 1, end, true);
        return;
      }
      if (t == "from") {
        for (std::size_t q = s + 1; q < end; ++q) {
          if (is_kw(q, "import")) {
            bind_import_names(q + 1, end, false);
            break;
          }
        }
        return;
      }
      if (t == "global" || t == "nonlocal") {
        for (std::size_t q = s + 1; q < end; ++q) {
          if (is_ident(q)) bind(q);
        }
        return;
      }
    }
    if (is_ident(s) && is_punct(s + 1, ":")) bind(s);  // annotated assignment
    std::size_t seg = s;
    for (std::size_t q = s; q < end; ++q) {
      if (is_punct(q, "(") || is_punct(q, "[") || is_punct(q, "{")) {
        q = match(q);
        continue;
      }
      if (kind(q) != LexKind::Punct) continue;
      const auto op = text(q);
      if (op == "=" || (op.size() >= 2 && op.back() == '=' && op != "==" && op != "!=" && op != "<=" &&
                        op != ">=")) {
        bind_targets(seg, q);
        seg = q + 1;
        if (op != "=") break;
      }
    }
  }

  void bind_import_names(std::size_t begin, std::size_t end, bool dotted_first) {
    std::size_t q = begin;
    bool expect_name = true;
    for (; q < end; ++q) {
      if (is_punct(q, "(") || is_punct(q, ")")) continue;
      if (is_punct(q, ",")) {
        expect_name = true;
        continue;
      }
      if (is_kw(q, "as")) {
        if (is_ident(q + 1)) {
          // replace the pending name with the alias
          bind(q + 1);
          ++q;
        }
        continue;
      }
      if (is_ident(q) && expect_name) {
        std::size_t r = q;
        while (is_punct(r + 1, ".") && is_ident(r + 2)) r += 2;
        if (!is_kw(r + 1, "as")) bind(dotted_first ? q : r);
        q = r;
        expect_name = false;
      }
    }
  }

  void collect_python_bindings() {
    // statements
    std::size_t q = body_begin_;
    while (q < body_end_) {
      const auto e = statement_end(q, body_end_);
      python_statement(q, e);
      q = e < body_end_ && is_punct(e, ";") ? e + 1 : e;
    }
    // expression-level binders and keyword arguments
    std::vector<std::size_t> brackets;
    for (std::size_t s = body_begin_; s < body_end_; ++s) {
      const auto t = text(s);
      if (is_kw(s, "for")) {
        std::size_t r = s + 1;
        while (r < body_end_ && !is_kw(r, "in")) {
          r = (is_punct(r, "(") || is_punct(r, "[")) ? match(r) + 1 : r + 1;
        }
        bind_targets(s + 1, r);
      } else if (is_kw(s, "lambda")) {
        for (std::size_t r = s + 1; r < body_end_ && !is_punct(r, ":"); ++r) {
          if (is_punct(r, "=")) {
            while (r < body_end_ && !is_punct(r, ",") && !is_punct(r, ":")) ++r;
            if (is_punct(r, ":")) break;
            continue;
          }
          if (is_ident(r)) bind(r);
        }
      } else if (is_kw(s, "as") && is_ident(s + 1)) {
        bind(s + 1);
      } else if (is_punct(s, ":=") && s > body_begin_ && is_ident(s - 1)) {
        bind(s - 1);
      }
      if (kind(s) == LexKind::Punct) {
        if (t == "(" || t == "[" || t == "{") brackets.push_back(s);
        if ((t == ")" || t == "]" || t == "}") && !brackets.empty()) brackets.pop_back();
      }
      if (is_ident(s) && is_punct(s + 1, "=") && !brackets.empty() && text(brackets.back()) == "(" &&
          brackets.back() > body_begin_ && (is_ident(brackets.back() - 1) || is_punct(brackets.back() - 1, ")") ||
                                            is_punct(brackets.back() - 1, "]"))) {
        kwarg_[sig_[s]] = true;
      }
    }
  }

  std::size_t python_depth() {
    if (!line_start_[body_begin_]) return 0;
    std::vector<std::size_t> stack = {column(body_begin_)};
    if (stack.front() <= def_column_) fail(body_begin_, "expected an indented block");
    std::size_t deepest = 0;
    for (std::size_t s = body_begin_; s < body_end_; ++s) {
      if (!line_start_[s]) continue;
      const auto col = column(s);
      if (col <= def_column_) fail(s, "unexpected code after function body");
      if (col > stack.back()) {
        stack.push_back(col);
      } else {
        while (col < stack.back()) stack.pop_back();
        if (stack.empty() || col != stack.back()) fail(s, "inconsistent dedent");
      }
      std::size_t head = s;
      if (is_kw(head, "async")) ++head;
      if (kind(head) == LexKind::Keyword && contains(kPythonCompound, text(head))) {
        deepest = std::max(deepest, stack.size());
      }
    }
    return deepest;
  }

  // ---- categories ----------------------------------------------------------

  Category category_of(std::size_t k, std::size_t s) const {
    const auto& lx = lx_[k];
    const auto t = lx.text(src_);
    switch (lx.kind) {
      case LexKind::Comment:
      case LexKind::String:
      case LexKind::Number:
      case LexKind::Punct:
      case LexKind::LineContinuation:
        return Category::Other;
      case LexKind::Keyword:
        if (in_keyword_table(lang_, t)) return Category::LanguageKeyword;
        if (detail::is_primitive_type(lang_, t)) return Category::TypeIdentifier;
        return Category::Other;
      case LexKind::Identifier:
        break;
    }
    if (s == method_name_) return Category::MethodName;
    const bool body = in_body(s);
    const bool after_dot = s > 0 && (is_punct(s - 1, ".") || is_punct(s - 1, "?.") || is_punct(s - 1, "::"));
    const std::string name(t);
    if (lang_ == Language::Python) {
      if (after_dot) return body && is_call_at(s) ? Category::MethodCall : Category::Other;
      if (kwarg_[k]) return Category::Other;
      if (params_.count(name)) return Category::InputVariable;
      if (body && locals_.count(name)) return Category::LocalVariable;
      if (body && is_call_at(s)) return Category::MethodCall;
      return Category::Other;
    }
    if (type_pos_[k] || lx.generic) return Category::TypeIdentifier;
    if (body && is_call_at(s)) return declares_method_at(s) ? Category::Other : Category::MethodCall;
    if (after_dot) return Category::Other;
    if (params_.count(name)) return Category::InputVariable;
    if (body && locals_.count(name)) return Category::LocalVariable;
    return Category::Other;
  }

  std::string_view src_;
  Language lang_;
  std::vector<Lexeme> lx_;
  std::vector<std::size_t> sig_;
  std::vector<std::size_t> match_;
  std::vector<std::size_t> generic_close_;
  std::vector<bool> line_start_;
  std::vector<bool> type_pos_;
  std::vector<bool> kwarg_;
  std::set<std::string> params_;
  std::set<std::string> locals_;
  std::size_t method_name_ = npos;
  std::size_t body_begin_ = 0;
  std::size_t body_end_ = 0;
  std::size_t def_column_ = 0;
  bool expression_body_ = false;
  std::size_t max_depth_ = 0;
};

std::uint64_t table_checksum(Language language) {
  std::string blob;
  for (const auto w : detail::reserved_words(language)) blob.append(w).push_back('\n');
  blob.push_back('\x1f');
  for (const auto w : detail::operator_table(language)) blob.append(w).push_back('\n');
  blob.push_back('\x1f');
  for (const auto w : detail::primitive_types(language)) blob.append(w).push_back('\n');
  blob.push_back('\x1f');
  for (const auto w : keyword_table(language)) blob.append(w).push_back('\n');
  return fnv1a64(blob);
}

}  // namespace

ParseError::ParseError(std::size_t position, std::size_t line, std::size_t column, const std::string& what)
    : Error(ErrorKind::Parse, "parse error at line " + std::to_string(line) + ", column " +
                                  std::to_string(column) + " (offset " + std::to_string(position) +
                                  "): " + what),
      position_(position),
      line_(line),
      column_(column) {}

std::string_view to_string(Category category) {
  switch (category) {
    case Category::MethodName: return "MethodName";
    case Category::InputVariable: return "InputVariable";
    case Category::MethodCall: return "MethodCall";
    case Category::LocalVariable: return "LocalVariable";
    case Category::TypeIdentifier: return "TypeIdentifier";
    case Category::LanguageKeyword: return "LanguageKeyword";
    case Category::Other: return "Other";
  }
  return "Other";
}

Category parse_category(std::string_view text) {
  for (const auto c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  throw Error(ErrorKind::Parse, "unknown token category '" + std::string(text) + "'");
}

const std::vector<std::string_view>& keyword_table(Language language) {
  switch (language) {
    case Language::Java: return kJavaKeywordTable;
    case Language::Python: return kPythonKeywordTable;
    case Language::CSharp: return csharp_keyword_table();
  }
  return kJavaKeywordTable;
}

bool in_keyword_table(Language language, std::string_view text) {
  return contains(keyword_table(language), text);
}

bool is_grammar_keyword(Language language, std::string_view text) {
  return contains(detail::reserved_words(language), text);
}

std::vector<GrammarInfo> builtin_grammars() {
  return {
      {"java", "1.0.0", table_checksum(Language::Java)},
      {"python", "1.0.0", table_checksum(Language::Python)},
      {"csharp", "1.0.0", table_checksum(Language::CSharp)},
  };
}

std::vector<CodeToken> tokenize(std::string_view source, Language language) {
  return MethodAnalysis(source, language).tokens(false);
}

std::vector<CodeToken> categorize(std::string_view source, Language language) {
  return MethodAnalysis(source, language).tokens(true);
}

ComplexityProfile complexity_metrics(std::string_view source, Language language) {
  MethodAnalysis analysis(source, language);
  return complexity_metrics(source, language, analysis.tokens(true));
}

ComplexityProfile complexity_metrics(std::string_view source, Language language,
                                     const std::vector<CodeToken>& categorized) {
  MethodAnalysis analysis(source, language);
  ComplexityProfile profile;
  profile.n_tokens = categorized.size();
  profile.cyclomatic = analysis.cyclomatic();
  profile.nested_block_depth = analysis.nesting_depth();
  std::set<std::string> names;
  for (const auto& token : categorized) {
    if (token.category == Category::InputVariable || token.category == Category::LocalVariable) {
      names.insert(token.text);
    }
  }
  profile.n_variables = names.size();
  return profile;
}

}  // namespace attnlens
