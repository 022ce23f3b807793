#pragma once

#include <array>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "attnlens/alignment.hpp"
#include "attnlens/code_parser.hpp"
#include "attnlens/dump_format.hpp"

namespace attnlens {

// Whitespace split, then leading/trailing punctuation peeled off into
// separate one-character tokens ("function." -> "function", ".").
std::vector<std::string> bleu_tokenize(std::string_view text);

struct NgramStats {
  std::array<std::size_t, 4> matches{};  // clipped matches per order 1..4
  std::array<std::size_t, 4> totals{};   // candidate n-grams per order
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

NgramStats ngram_stats(const std::vector<std::string>& candidate, const std::vector<std::string>& reference);

struct BleuScore {
  double value = 0.0;
  bool smoothed = false;
  bool empty_candidate = false;
  static constexpr int n_max = 4;
};

// Sentence BLEU-4 with uniform weights. The smoothed form adds one to the
// numerator and denominator of the 2..4-gram precisions and uses the brevity
// penalty exp(min(0, 1 - (r + 1) / (c + 1))); the plain form returns 0 as soon
// as any precision is zero. Orders longer than the candidate count as precision
// one. Tokens are compared case-sensitively.
BleuScore bleu4(std::string_view candidate, std::string_view reference, bool smoothed);
double bleu4_from_stats(const NgramStats& stats, bool smoothed);

// Runs of whitespace collapsed to one space, leading/trailing whitespace removed.
std::string normalize_whitespace(std::string_view text);

// Edit distance over Unicode code points (invalid UTF-8 bytes count as one unit each).
std::size_t levenshtein(std::string_view a, std::string_view b);
// Edit distance over whitespace-separated tokens.
std::size_t levenshtein_tokens(std::string_view a, std::string_view b);

// Bundled English lemmatizer: table lookup, then plural/-ing/-ed fallbacks.
std::string lemmatize(std::string_view lowercase_word);

std::set<std::string> preprocess_doc(std::string_view gold_text);

struct OverlapScore {
  double value = 0.0;
  std::set<std::string> gold_tokens_used;
  std::set<std::string> matched;
  bool empty_gold = false;
};

OverlapScore doc_overlap(std::string_view gold_text, const std::vector<CodeToken>& code_tokens);

enum class DistanceUnit { Characters, Tokens };

struct SampleMetrics {
  std::string id;
  double bleu4_smoothed = 0.0;
  bool empty_candidate = false;
  // Levenshtein between source and gold for CR/CT, doc overlap for CDG.
  double difficulty = 0.0;
  bool exact_match = false;
  ComplexityProfile complexity;
};

// Per-record metrics. `code_tokens` must be the categorized source tokens.
SampleMetrics sample_metrics(const SampleRecord& record, const std::vector<CodeToken>& code_tokens,
                             DistanceUnit unit = DistanceUnit::Characters);

// Parses every source as `language` and computes metrics in parallel.
std::vector<SampleMetrics> corpus_metrics(const Corpus& corpus, Language language,
                                          DistanceUnit unit = DistanceUnit::Characters);

}  // namespace attnlens
