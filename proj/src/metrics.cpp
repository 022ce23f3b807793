#include "attnlens/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <unordered_map>

#include "attnlens/parallel.hpp"

namespace attnlens {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_punct(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::ispunct(u);
}

std::vector<std::string_view> split_ws(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.push_back(text.substr(start, i - start));
  }
  return out;
}

// Decodes UTF-8 into code points; malformed bytes become one unit each.
std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    char32_t cp = len == 1 ? b : len == 2 ? b & 0x1F : len == 3 ? b & 0x0F : b & 0x07;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto c = static_cast<unsigned char>(s[i + k]);
      if ((c >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (c & 0x3F);
    }
    if (!ok) {
      out.push_back(0x110000 + b);  // outside the Unicode range, never equal to a real code point
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

template <typename T>
std::size_t edit_distance(const std::vector<T>& a, const std::vector<T>& b) {
  const auto& s = a.size() < b.size() ? b : a;
  const auto& t = a.size() < b.size() ? a : b;
  std::vector<std::size_t> row(t.size() + 1);
  for (std::size_t j = 0; j <= t.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= s.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= t.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (s[i - 1] == t[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[t.size()];
}

const char kLemmaData[] =
#include "lemmas_data.inc"
    ;

const std::unordered_map<std::string, std::string>& lemma_table() {
  static const auto table = [] {
    std::unordered_map<std::string, std::string> t;
    std::istringstream in{std::string(kLemmaData)};
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      t.emplace(line.substr(0, tab), line.substr(tab + 1));
    }
    return t;
  }();
  return table;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
}

bool has_vowel(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

// "stopp" -> "stop"; l, s and z doublings are kept ("call", "miss", "buzz").
std::string undouble(std::string stem) {
  const auto n = stem.size();
  if (n >= 3 && stem[n - 1] == stem[n - 2] && !is_vowel(stem[n - 1]) && stem[n - 1] != 'l' && stem[n - 1] != 's' &&
      stem[n - 1] != 'z') {
    stem.pop_back();
  }
  return stem;
}

}  // namespace

std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto word : split_ws(text)) {
    std::size_t lo = 0;
    std::size_t hi = word.size();
    while (lo < hi && is_punct(word[lo])) ++lo;
    if (lo == hi) {
      for (char c : word) out.emplace_back(1, c);
      continue;
    }
    while (hi > lo && is_punct(word[hi - 1])) --hi;
    for (std::size_t i = 0; i < lo; ++i) out.emplace_back(1, word[i]);
    out.emplace_back(word.substr(lo, hi - lo));
    for (std::size_t i = hi; i < word.size(); ++i) out.emplace_back(1, word[i]);
  }
  return out;
}

NgramStats ngram_stats(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  NgramStats st;
  st.candidate_length = candidate.size();
  st.reference_length = reference.size();
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, std::size_t> ref_counts;
    for (std::size_t i = 0; i + n <= reference.size(); ++i) {
      ++ref_counts[std::vector<std::string>(reference.begin() + i, reference.begin() + i + n)];
    }
    std::map<std::vector<std::string>, std::size_t> cand_counts;
    for (std::size_t i = 0; i + n <= candidate.size(); ++i) {
      ++cand_counts[std::vector<std::string>(candidate.begin() + i, candidate.begin() + i + n)];
    }
    std::size_t matches = 0;
    std::size_t total = 0;
    for (const auto& [gram, count] : cand_counts) {
      total += count;
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matches += std::min(count, it->second);
    }
    st.matches[n - 1] = matches;
    st.totals[n - 1] = total;
  }
  return st;
}

double bleu4_from_stats(const NgramStats& st, bool smoothed) {
  if (st.candidate_length == 0 || st.matches[0] == 0) return 0.0;
  double log_precision = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    const double add = smoothed && k > 0 ? 1.0 : 0.0;
    const double num = static_cast<double>(st.matches[k]) + add;
    const double den = static_cast<double>(st.totals[k]) + add;
    if (den == 0.0) continue;  // candidate shorter than k+1 tokens: precision 1
    if (num == 0.0) return 0.0;
    log_precision += std::log(num / den);
  }
  log_precision /= 4.0;
  const double c = static_cast<double>(st.candidate_length);
  const double r = static_cast<double>(st.reference_length);
  const double penalty =
      smoothed ? std::min(0.0, 1.0 - (r + 1.0) / (c + 1.0)) : (c >= r ? 0.0 : 1.0 - r / c);
  return std::clamp(std::exp(log_precision + penalty), 0.0, 1.0);
}

BleuScore bleu4(std::string_view candidate, std::string_view reference, bool smoothed) {
  BleuScore out;
  out.smoothed = smoothed;
  const auto cand = bleu_tokenize(candidate);
  if (cand.empty()) {
    out.empty_candidate = true;
    return out;
  }
  out.value = bleu4_from_stats(ngram_stats(cand, bleu_tokenize(reference)), smoothed);
  return out;
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  for (auto word : split_ws(text)) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return edit_distance(code_points(a), code_points(b));
}

std::size_t levenshtein_tokens(std::string_view a, std::string_view b) {
  return edit_distance(split_ws(a), split_ws(b));
}

std::string lemmatize(std::string_view word) {
  const std::string w(word);
  const auto& table = lemma_table();
  if (const auto it = table.find(w); it != table.end()) return it->second;
  if (w.size() <= 3) return w;
  if ((ends_with(w, "ies") || ends_with(w, "ied")) && w.size() > 4) return w.substr(0, w.size() - 3) + "y";
  if (ends_with(w, "sses")) return w.substr(0, w.size() - 2);
  if (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") || ends_with(w, "zes")) {
    return w.substr(0, w.size() - 2);
  }
  if (ends_with(w, "s") && !ends_with(w, "ss") && !ends_with(w, "us") && !ends_with(w, "is")) {
    return w.substr(0, w.size() - 1);
  }
  if (ends_with(w, "ing")) {
    const auto stem = w.substr(0, w.size() - 3);
    if (stem.size() >= 3 && has_vowel(stem)) return undouble(stem);
  }
  if (ends_with(w, "ed")) {
    const auto stem = w.substr(0, w.size() - 2);
    if (stem.size() >= 3 && has_vowel(stem) && !is_vowel(stem.back())) return undouble(stem);
  }
  return w;
}

std::set<std::string> preprocess_doc(std::string_view gold_text) {
  std::set<std::string> out;
  for (auto word : split_ws(gold_text)) {
    std::size_t lo = 0;
    std::size_t hi = word.size();
    while (lo < hi && is_punct(word[lo])) ++lo;
    while (hi > lo && is_punct(word[hi - 1])) --hi;
    const auto token = word.substr(lo, hi - lo);
    if (code_points(token).size() < 3) continue;
    out.insert(lemmatize(ascii_lower(token)));
  }
  return out;
}

OverlapScore doc_overlap(std::string_view gold_text, const std::vector<CodeToken>& code_tokens) {
  OverlapScore out;
  out.gold_tokens_used = preprocess_doc(gold_text);
  if (out.gold_tokens_used.empty()) {
    out.empty_gold = true;
    return out;
  }
  std::set<std::string> code;
  for (const auto& t : code_tokens) code.insert(ascii_lower(t.text));
  std::set_intersection(out.gold_tokens_used.begin(), out.gold_tokens_used.end(), code.begin(), code.end(),
                        std::inserter(out.matched, out.matched.begin()));
  out.value = static_cast<double>(out.matched.size()) / static_cast<double>(out.gold_tokens_used.size());
  return out;
}

SampleMetrics sample_metrics(const SampleRecord& record, const std::vector<CodeToken>& code_tokens,
                             DistanceUnit unit) {
  SampleMetrics m;
  m.id = record.id;
  const auto bleu = bleu4(record.prediction_text, record.gold_text, true);
  m.bleu4_smoothed = bleu.value;
  m.empty_candidate = bleu.empty_candidate;
  if (record.task == Task::CDG) {
    m.difficulty = doc_overlap(record.gold_text, code_tokens).value;
  } else {
    const auto src = normalize_whitespace(record.source_text);
    const auto gold = normalize_whitespace(record.gold_text);
    m.difficulty = static_cast<double>(unit == DistanceUnit::Tokens ? levenshtein_tokens(src, gold)
                                                                    : levenshtein(src, gold));
  }
  m.exact_match = normalize_whitespace(record.prediction_text) == normalize_whitespace(record.gold_text);
  m.complexity = complexity_metrics(record.source_text, record.source_language, code_tokens);
  return m;
}

std::vector<SampleMetrics> corpus_metrics(const Corpus& corpus, Language language, DistanceUnit unit) {
  std::vector<SampleMetrics> out(corpus.records.size());
  parallel_for(corpus.records.size(), [&](std::size_t i) {
    const auto& record = corpus.records[i];
    check_language(record, language);
    try {
      const auto tokens = categorize(record.source_text, language);
      out[i] = sample_metrics(record, tokens, unit);
    } catch (const Error& e) {
      throw Error(e.kind(), "record '" + record.id + "': " + e.what());
    }
  });
  return out;
}

}  // namespace attnlens
