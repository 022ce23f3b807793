#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "attnlens/alignment.hpp"

namespace attnlens {

struct RankObservation {
  std::string record_id;
  std::size_t layer = 0;
  std::size_t step = 0;
  std::size_t matched_token_index = 0;
  std::size_t rank_1based = 1;
  double normalized_rank = 0.0;  // 100 * (rank - 1) / n_input_tokens
  std::size_t n_input_tokens = 0;

  bool operator==(const RankObservation&) const = default;
};

struct LayerRank {
  std::size_t layer = 0;
  std::optional<double> mean_normalized_rank;  // nullopt when the layer has no observations
  std::optional<double> topk_hit_rate;
  std::size_t n_observations = 0;
};

struct RankReport {
  std::size_t k = 3;
  bool sample_weighted = false;
  std::vector<LayerRank> layers;
  double repeated_token_ratio = 0.0;
  std::size_t n_steps = 0;
  std::size_t n_repeated_steps = 0;
  bool empty = true;  // no observation in any layer
};

// Comparison key for output steps and code tokens: surrounding whitespace and
// a leading BPE space marker (U+0120) removed, ASCII case folded.
std::string match_key(std::string_view token);

// Fraction of output steps (over all samples) with a case-insensitively equal
// input code token; 0 when there are no steps.
double repeated_token_ratio(const std::vector<AlignedSample>& aligned);

// Best 1-based rank of a matching input token per (layer, step). Ties in
// attention are ranked by ascending token index.
std::vector<RankObservation> rank_observations(const AlignedSample& aligned);

// 1-based rank of `token` in `row` under the tie rule above.
std::size_t rank_of(std::span<const double> row, std::size_t token);

// Per-layer means and top-k hit rates. Observation-weighted by default;
// `sample_weighted` first averages within each sample. Observations are
// extracted in parallel and merged in sample order.
RankReport rank_report(const std::vector<AlignedSample>& aligned, std::size_t k = 3, bool sample_weighted = false);

// Keeps only the listed layers, in the given order.
RankReport select_layers(const RankReport& report, const std::vector<std::size_t>& layers);

void write_rank_csv(const RankReport& report, std::ostream& out);

}  // namespace attnlens
