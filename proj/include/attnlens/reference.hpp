#pragma once

// Straightforward serial implementations of the corpus kernels. They share no
// code with the optimized paths and exist for equivalence tests and the
// benchmark.

#include <vector>

#include "attnlens/alignment.hpp"
#include "attnlens/attribution.hpp"
#include "attnlens/metrics.hpp"
#include "attnlens/rank.hpp"

namespace attnlens::reference {

// Compares every subword against every code token.
Assignment map_subwords(const std::vector<SubwordToken>& subwords, const std::vector<CodeToken>& code_tokens);

// Per-token lists of assigned scores, averaged at the end.
AlignedSample align(const SampleRecord& record, const std::vector<CodeToken>& code_tokens);

std::vector<AlignedSample> align_corpus(const Corpus& corpus, Language language);

// Sorts the whole row (score descending, index ascending) and scans it.
std::vector<RankObservation> rank_observations(const AlignedSample& aligned);

RankReport rank_report(const std::vector<AlignedSample>& aligned, std::size_t k);

Accumulation accumulate(const std::vector<AlignedSample>& aligned);

// Full-matrix dynamic program.
std::size_t levenshtein(std::string_view a, std::string_view b);

std::vector<SampleMetrics> corpus_metrics(const Corpus& corpus, Language language);

}  // namespace attnlens::reference
