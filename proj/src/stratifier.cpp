#include "attnlens/stratifier.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace attnlens {

namespace {

std::vector<std::size_t> total_order(const std::vector<double>& values, const std::vector<std::string>& ids) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] < values[b];
    return ids[a] < ids[b];
  });
  return order;
}

TercileCuts cuts(const std::vector<double>& values, const std::vector<std::string>& ids) {
  const auto order = total_order(values, ids);
  const std::size_t third = values.size() / 3;
  return {values[order[third - 1]], values[order[values.size() - third]]};
}

}  // namespace

std::string_view to_string(Quadrant q) {
  switch (q) {
    case Quadrant::EasyHigh: return "EasyHigh";
    case Quadrant::EasyLow: return "EasyLow";
    case Quadrant::HardHigh: return "HardHigh";
    case Quadrant::HardLow: return "HardLow";
    case Quadrant::Mid: return "Mid";
  }
  return "Mid";
}

Quadrant parse_quadrant(std::string_view text) {
  for (const auto q : kAllQuadrants) {
    if (to_string(q) == text) return q;
  }
  throw Error(ErrorKind::Usage, "unknown quadrant '" + std::string(text) + "'");
}

std::string_view difficulty_label(Tercile t) {
  return t == Tercile::Easy ? "easy" : t == Tercile::Hard ? "hard" : "mid";
}

std::string_view accuracy_label(Tercile t) {
  return t == Tercile::Easy ? "high" : t == Tercile::Hard ? "low" : "mid";
}

Direction difficulty_direction(Task task) {
  return task == Task::CDG ? Direction::HighIsEasy : Direction::LowIsEasy;
}

std::vector<Tercile> tercile_split(const std::vector<double>& values, const std::vector<std::string>& ids,
                                   Direction direction) {
  if (values.size() != ids.size()) throw Error(ErrorKind::Dimension, "tercile_split: values and ids differ in length");
  if (values.size() < 3) {
    throw Error(ErrorKind::Empty, "tercile split needs at least 3 samples, got " + std::to_string(values.size()));
  }
  const auto order = total_order(values, ids);
  const std::size_t n = values.size();
  const std::size_t third = n / 3;
  const Tercile front = direction == Direction::LowIsEasy ? Tercile::Easy : Tercile::Hard;
  const Tercile back = direction == Direction::LowIsEasy ? Tercile::Hard : Tercile::Easy;
  std::vector<Tercile> out(n, Tercile::Mid);
  for (std::size_t r = 0; r < n; ++r) {
    if (r < third) {
      out[order[r]] = front;
    } else if (r >= n - third) {
      out[order[r]] = back;
    }
  }
  return out;
}

Quadrant quadrant_of(Tercile difficulty, Tercile accuracy) {
  if (difficulty == Tercile::Mid || accuracy == Tercile::Mid) return Quadrant::Mid;
  if (difficulty == Tercile::Easy) return accuracy == Tercile::Easy ? Quadrant::EasyHigh : Quadrant::EasyLow;
  return accuracy == Tercile::Easy ? Quadrant::HardHigh : Quadrant::HardLow;
}

StratifiedCorpus label_quadrants(const std::vector<SampleMetrics>& metrics, Task task) {
  StratifiedCorpus s;
  s.task = task;
  s.direction = difficulty_direction(task);
  std::vector<double> difficulty;
  std::vector<double> bleu;
  std::vector<std::string> ids;
  for (const auto& m : metrics) {
    difficulty.push_back(m.difficulty);
    bleu.push_back(m.bleu4_smoothed);
    ids.push_back(m.id);
  }
  const auto d = tercile_split(difficulty, ids, s.direction);
  const auto b = tercile_split(bleu, ids, Direction::HighIsEasy);
  s.difficulty_cuts = cuts(difficulty, ids);
  s.bleu_cuts = cuts(bleu, ids);
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    StratumRow row;
    row.id = metrics[i].id;
    row.difficulty = difficulty[i];
    row.bleu = bleu[i];
    row.difficulty_tercile = d[i];
    row.bleu_tercile = b[i];
    row.quadrant = quadrant_of(d[i], b[i]);
    row.complexity = metrics[i].complexity;
    ++s.quadrant_counts[static_cast<std::size_t>(row.quadrant)];
    s.rows.push_back(std::move(row));
  }
  return s;
}

std::string metric_name(Metric metric, Task task) {
  switch (metric) {
    case Metric::Difficulty: return task == Task::CDG ? "overlap" : "levenshtein";
    case Metric::Bleu: return "bleu4_smoothed";
    case Metric::NTokens: return "n_tokens";
    case Metric::Cyclomatic: return "cyclomatic";
    case Metric::NestedBlockDepth: return "nested_block_depth";
    case Metric::NVariables: return "n_variables";
  }
  return "unknown";
}

double metric_value(const StratumRow& row, Metric metric) {
  switch (metric) {
    case Metric::Difficulty: return row.difficulty;
    case Metric::Bleu: return row.bleu;
    case Metric::NTokens: return static_cast<double>(row.complexity.n_tokens);
    case Metric::Cyclomatic: return static_cast<double>(row.complexity.cyclomatic);
    case Metric::NestedBlockDepth: return static_cast<double>(row.complexity.nested_block_depth);
    case Metric::NVariables: return static_cast<double>(row.complexity.n_variables);
  }
  return 0.0;
}

HistogramPair distribution_compare(Metric metric, const StratifiedCorpus& whole, Quadrant subset, std::size_t bins) {
  if (bins == 0) throw Error(ErrorKind::Usage, "histogram bins must be positive");
  if (whole.rows.empty()) throw Error(ErrorKind::Empty, "distribution_compare needs a non-empty corpus");
  HistogramPair h;
  double lo = metric_value(whole.rows.front(), metric);
  double hi = lo;
  for (const auto& r : whole.rows) {
    lo = std::min(lo, metric_value(r, metric));
    hi = std::max(hi, metric_value(r, metric));
  }
  const std::size_t n_bins = lo == hi ? 1 : bins;
  for (std::size_t i = 0; i <= n_bins; ++i) {
    h.edges.push_back(i == n_bins ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins));
  }
  h.whole_counts.assign(n_bins, 0);
  h.subset_counts.assign(n_bins, 0);
  const auto bin_of = [&](double v) -> std::size_t {
    if (n_bins == 1) return 0;
    const auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(n_bins));
    return std::min(b, n_bins - 1);
  };
  std::size_t subset_total = 0;
  for (const auto& r : whole.rows) {
    const auto b = bin_of(metric_value(r, metric));
    ++h.whole_counts[b];
    if (r.quadrant == subset) {
      ++h.subset_counts[b];
      ++subset_total;
    }
  }
  for (const auto c : h.whole_counts) {
    h.whole_fraction.push_back(static_cast<double>(c) / static_cast<double>(whole.rows.size()));
  }
  h.subset_empty = subset_total == 0;
  if (!h.subset_empty) {
    for (const auto c : h.subset_counts) {
      h.subset_fraction.push_back(static_cast<double>(c) / static_cast<double>(subset_total));
    }
  }
  return h;
}

HighLevelProfile category_attention_delta(const HighLevelProfile& whole, const HighLevelProfile& subset) {
  return {subset.naming_pct - whole.naming_pct, subset.structural_pct - whole.structural_pct,
          subset.others_pct - whole.others_pct};
}

void write_labels_csv(const StratifiedCorpus& s, std::ostream& out) {
  out << "id," << metric_name(Metric::Difficulty, s.task)
      << ",bleu4_smoothed,difficulty_tercile,bleu_tercile,quadrant,n_tokens,cyclomatic,nested_block_depth,"
         "n_variables\n";
  for (const auto& r : s.rows) {
    out << r.id << ',' << fixed6(r.difficulty) << ',' << fixed6(r.bleu) << ',' << difficulty_label(r.difficulty_tercile)
        << ',' << accuracy_label(r.bleu_tercile) << ',' << to_string(r.quadrant) << ',' << r.complexity.n_tokens << ','
        << r.complexity.cyclomatic << ',' << r.complexity.nested_block_depth << ',' << r.complexity.n_variables
        << '\n';
  }
}

void write_quadrants_csv(const StratifiedCorpus& s, std::ostream& out) {
  out << "quadrant,count,ratio\n";
  for (const auto q : kAllQuadrants) {
    out << to_string(q) << ',' << s.count(q) << ','
        << fixed6(static_cast<double>(s.count(q)) / static_cast<double>(s.rows.size())) << '\n';
  }
}

void write_histogram_csv(const HistogramPair& h, std::ostream& out) {
  out << "bin,lower,upper,whole_count,whole_fraction,subset_count,subset_fraction\n";
  for (std::size_t i = 0; i < h.whole_counts.size(); ++i) {
    out << i << ',' << fixed6(h.edges[i]) << ',' << fixed6(h.edges[i + 1]) << ',' << h.whole_counts[i] << ','
        << fixed6(h.whole_fraction[i]) << ',' << h.subset_counts[i] << ','
        << (h.subset_empty ? std::string("empty") : fixed6(h.subset_fraction[i])) << '\n';
  }
}

}  // namespace attnlens
