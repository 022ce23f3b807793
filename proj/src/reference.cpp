#include "attnlens/reference.hpp"

#include <algorithm>
#include <numeric>

namespace attnlens::reference {

Assignment map_subwords(const std::vector<SubwordToken>& subwords, const std::vector<CodeToken>& code_tokens) {
  Assignment out(subwords.size());
  for (std::size_t w = 0; w < subwords.size(); ++w) {
    std::size_t best = 0;
    for (std::size_t t = 0; t < code_tokens.size(); ++t) {
      const auto lo = std::max(subwords[w].char_start, code_tokens[t].char_start);
      const auto hi = std::min(subwords[w].char_end, code_tokens[t].char_end);
      if (hi > lo && hi - lo > best) {
        best = hi - lo;
        out[w] = t;
      }
    }
  }
  return out;
}

AlignedSample align(const SampleRecord& record, const std::vector<CodeToken>& code_tokens) {
  for (const auto& sw : record.subwords) {
    if (sw.char_end > record.source_text.size() || sw.char_start >= sw.char_end) {
      throw Error(ErrorKind::Alignment, "record '" + record.id + "': subword '" + sw.text + "' outside the source");
    }
  }
  const auto assignment = reference::map_subwords(record.subwords, code_tokens);
  AlignedSample out;
  out.record_id = record.id;
  out.task = record.task;
  out.source_language = record.source_language;
  out.source_text = record.source_text;
  out.output_steps = record.output_steps;
  out.code_tokens = code_tokens;
  out.subword_counts.assign(code_tokens.size(), 0);
  for (const auto& a : assignment) {
    if (a) ++out.subword_counts[*a];
  }
  const auto& raw = record.attention;
  out.attention = Tensor3(raw.layers(), raw.steps(), code_tokens.size());
  out.orphan_mass.assign(raw.layers() * raw.steps(), 0.0);
  for (std::size_t l = 0; l < raw.layers(); ++l) {
    for (std::size_t s = 0; s < raw.steps(); ++s) {
      std::vector<std::vector<double>> scores(code_tokens.size());
      for (std::size_t w = 0; w < record.subwords.size(); ++w) {
        if (assignment[w]) {
          scores[*assignment[w]].push_back(raw(l, s, w));
        } else {
          out.orphan_mass[l * raw.steps() + s] += raw(l, s, w);
        }
      }
      for (std::size_t t = 0; t < code_tokens.size(); ++t) {
        if (scores[t].empty()) continue;
        out.attention(l, s, t) =
            std::accumulate(scores[t].begin(), scores[t].end(), 0.0) / static_cast<double>(scores[t].size());
      }
    }
  }
  return out;
}

std::vector<AlignedSample> align_corpus(const Corpus& corpus, Language language) {
  std::vector<AlignedSample> out;
  for (const auto& r : corpus.records) out.push_back(reference::align(r, categorize(r.source_text, language)));
  return out;
}

std::vector<RankObservation> rank_observations(const AlignedSample& aligned) {
  std::vector<RankObservation> out;
  const std::size_t n = aligned.code_tokens.size();
  for (std::size_t l = 0; l < aligned.num_layers(); ++l) {
    for (std::size_t s = 0; s < aligned.num_steps(); ++s) {
      const auto key = match_key(aligned.output_steps[s]);
      if (key.empty()) continue;
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), 0);
      const auto row = aligned.attention.row(l, s);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
      for (std::size_t r = 0; r < n; ++r) {
        if (match_key(aligned.code_tokens[order[r]].text) != key) continue;
        RankObservation obs;
        obs.record_id = aligned.record_id;
        obs.layer = l;
        obs.step = s;
        obs.matched_token_index = order[r];
        obs.rank_1based = r + 1;
        obs.n_input_tokens = n;
        obs.normalized_rank = 100.0 * static_cast<double>(r) / static_cast<double>(n);
        out.push_back(obs);
        break;
      }
    }
  }
  return out;
}

RankReport rank_report(const std::vector<AlignedSample>& aligned, std::size_t k) {
  RankReport report;
  report.k = k;
  std::size_t n_layers = 0;
  for (const auto& a : aligned) n_layers = std::max(n_layers, a.num_layers());
  std::vector<double> sum(n_layers, 0.0);
  std::vector<std::size_t> hits(n_layers, 0);
  std::vector<std::size_t> count(n_layers, 0);
  for (const auto& a : aligned) {
    for (const auto& o : reference::rank_observations(a)) {
      sum[o.layer] += o.normalized_rank;
      hits[o.layer] += o.rank_1based <= k ? 1 : 0;
      ++count[o.layer];
    }
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    LayerRank lr;
    lr.layer = l;
    lr.n_observations = count[l];
    if (count[l] > 0) {
      lr.mean_normalized_rank = sum[l] / static_cast<double>(count[l]);
      lr.topk_hit_rate = static_cast<double>(hits[l]) / static_cast<double>(count[l]);
      report.empty = false;
    }
    report.layers.push_back(lr);
  }
  report.repeated_token_ratio = repeated_token_ratio(aligned);
  return report;
}

Accumulation accumulate(const std::vector<AlignedSample>& aligned) {
  Accumulation acc;
  if (aligned.empty()) return acc;
  const std::size_t layers = aligned.front().num_layers();
  acc.raw_mass.assign(layers, CategoryValues{});
  acc.orphan_mass.assign(layers, 0.0);
  for (const auto& a : aligned) {
    ++acc.n_samples;
    for (const auto& t : a.code_tokens) ++acc.population[category_index(t.category)];
    for (std::size_t l = 0; l < layers; ++l) {
      for (std::size_t s = 0; s < a.num_steps(); ++s) {
        for (std::size_t t = 0; t < a.code_tokens.size(); ++t) {
          acc.raw_mass[l][category_index(a.code_tokens[t].category)] += a.attention(l, s, t);
        }
        acc.orphan_mass[l] += a.orphan(l, s);
      }
    }
  }
  return acc;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  // byte-level is enough for the ASCII inputs this is used with
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    }
  }
  return d[a.size()][b.size()];
}

std::vector<SampleMetrics> corpus_metrics(const Corpus& corpus, Language language) {
  std::vector<SampleMetrics> out;
  for (const auto& r : corpus.records) out.push_back(sample_metrics(r, categorize(r.source_text, language)));
  return out;
}

}  // namespace attnlens::reference
