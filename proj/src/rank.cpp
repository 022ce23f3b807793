#include "attnlens/rank.hpp"

#include <ostream>
#include <tuple>
#include <unordered_set>

#include "attnlens/parallel.hpp"

namespace attnlens {

namespace {

std::size_t max_layers(const std::vector<AlignedSample>& aligned) {
  std::size_t n = 0;
  for (const auto& a : aligned) n = std::max(n, a.num_layers());
  return n;
}

std::string opt6(const std::optional<double>& v) {
  return v ? fixed6(*v) : std::string();
}

}  // namespace

std::string match_key(std::string_view token) {
  constexpr std::string_view kSpaceMarker = "\xC4\xA0";  // U+0120
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  while (!token.empty() && is_ws(token.front())) token.remove_prefix(1);
  if (token.substr(0, kSpaceMarker.size()) == kSpaceMarker) token.remove_prefix(kSpaceMarker.size());
  while (!token.empty() && is_ws(token.front())) token.remove_prefix(1);
  while (!token.empty() && is_ws(token.back())) token.remove_suffix(1);
  return ascii_lower(token);
}

namespace {

std::pair<std::size_t, std::size_t> repeated_counts(const std::vector<AlignedSample>& aligned) {
  std::size_t steps = 0;
  std::size_t repeated = 0;
  for (const auto& a : aligned) {
    std::unordered_set<std::string> inputs;
    for (const auto& t : a.code_tokens) inputs.insert(match_key(t.text));
    for (const auto& s : a.output_steps) {
      ++steps;
      const auto key = match_key(s);
      if (!key.empty() && inputs.count(key)) ++repeated;
    }
  }
  return {repeated, steps};
}

}  // namespace

double repeated_token_ratio(const std::vector<AlignedSample>& aligned) {
  const auto [repeated, steps] = repeated_counts(aligned);
  return steps == 0 ? 0.0 : static_cast<double>(repeated) / static_cast<double>(steps);
}

std::size_t rank_of(std::span<const double> row, std::size_t token) {
  const double v = row[token];
  std::size_t ahead = 0;
  for (std::size_t t = 0; t < row.size(); ++t) {
    if (row[t] > v || (row[t] == v && t < token)) ++ahead;
  }
  return ahead + 1;
}

std::vector<RankObservation> rank_observations(const AlignedSample& aligned) {
  std::vector<RankObservation> out;
  const std::size_t n = aligned.code_tokens.size();
  if (n == 0) return out;
  std::vector<std::string> keys;
  keys.reserve(n);
  for (const auto& t : aligned.code_tokens) keys.push_back(match_key(t.text));

  std::vector<std::vector<std::size_t>> matches(aligned.output_steps.size());
  for (std::size_t s = 0; s < aligned.output_steps.size(); ++s) {
    const auto key = match_key(aligned.output_steps[s]);
    if (key.empty()) continue;
    for (std::size_t t = 0; t < n; ++t) {
      if (keys[t] == key) matches[s].push_back(t);
    }
  }

  for (std::size_t l = 0; l < aligned.num_layers(); ++l) {
    for (std::size_t s = 0; s < aligned.num_steps(); ++s) {
      if (matches[s].empty()) continue;
      const auto row = aligned.attention.row(l, s);
      // the best-ranked match is the one with the highest score, earliest on ties
      std::size_t best = matches[s].front();
      for (const auto t : matches[s]) {
        if (row[t] > row[best]) best = t;
      }
      RankObservation obs;
      obs.record_id = aligned.record_id;
      obs.layer = l;
      obs.step = s;
      obs.matched_token_index = best;
      obs.rank_1based = rank_of(row, best);
      obs.n_input_tokens = n;
      obs.normalized_rank = 100.0 * static_cast<double>(obs.rank_1based - 1) / static_cast<double>(n);
      out.push_back(std::move(obs));
    }
  }
  return out;
}

RankReport rank_report(const std::vector<AlignedSample>& aligned, std::size_t k, bool sample_weighted) {
  RankReport report;
  report.k = k;
  report.sample_weighted = sample_weighted;
  const std::size_t n_layers = max_layers(aligned);

  std::vector<std::vector<RankObservation>> per_sample(aligned.size());
  parallel_for(aligned.size(), [&](std::size_t i) { per_sample[i] = rank_observations(aligned[i]); });

  std::vector<double> sum(n_layers, 0.0);
  std::vector<double> hits(n_layers, 0.0);
  std::vector<std::size_t> units(n_layers, 0);
  std::vector<std::size_t> counts(n_layers, 0);
  for (const auto& obs : per_sample) {
    std::vector<double> s_sum(n_layers, 0.0);
    std::vector<double> s_hits(n_layers, 0.0);
    std::vector<std::size_t> s_count(n_layers, 0);
    for (const auto& o : obs) {
      s_sum[o.layer] += o.normalized_rank;
      s_hits[o.layer] += o.rank_1based <= k ? 1.0 : 0.0;
      ++s_count[o.layer];
    }
    for (std::size_t l = 0; l < n_layers; ++l) {
      if (s_count[l] == 0) continue;
      counts[l] += s_count[l];
      if (sample_weighted) {
        sum[l] += s_sum[l] / static_cast<double>(s_count[l]);
        hits[l] += s_hits[l] / static_cast<double>(s_count[l]);
        ++units[l];
      } else {
        sum[l] += s_sum[l];
        hits[l] += s_hits[l];
        units[l] += s_count[l];
      }
    }
  }

  for (std::size_t l = 0; l < n_layers; ++l) {
    LayerRank lr;
    lr.layer = l;
    lr.n_observations = counts[l];
    if (units[l] > 0) {
      lr.mean_normalized_rank = sum[l] / static_cast<double>(units[l]);
      lr.topk_hit_rate = hits[l] / static_cast<double>(units[l]);
      report.empty = false;
    }
    report.layers.push_back(lr);
  }

  std::tie(report.n_repeated_steps, report.n_steps) = repeated_counts(aligned);
  report.repeated_token_ratio = repeated_token_ratio(aligned);
  return report;
}

RankReport select_layers(const RankReport& report, const std::vector<std::size_t>& layers) {
  RankReport out = report;
  out.layers.clear();
  out.empty = true;
  for (const auto l : layers) {
    if (l >= report.layers.size()) {
      throw Error(ErrorKind::Usage, "layer " + std::to_string(l) + " out of range [0, " +
                                        std::to_string(report.layers.size()) + ")");
    }
    out.layers.push_back(report.layers[l]);
    if (report.layers[l].n_observations > 0) out.empty = false;
  }
  return out;
}

void write_rank_csv(const RankReport& report, std::ostream& out) {
  out << "layer,mean_normalized_rank,topk_hit_rate,n_observations\n";
  for (const auto& l : report.layers) {
    out << l.layer << ',' << opt6(l.mean_normalized_rank) << ',' << opt6(l.topk_hit_rate) << ','
        << l.n_observations << '\n';
  }
}

}  // namespace attnlens
