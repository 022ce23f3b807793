#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "attnlens/attribution.hpp"
#include "attnlens/metrics.hpp"

namespace attnlens {

enum class Direction { LowIsEasy, HighIsEasy };

// Easy/Hard on the difficulty axis; on the BLEU axis Easy means High.
enum class Tercile { Easy, Mid, Hard };
enum class Quadrant { EasyHigh, EasyLow, HardHigh, HardLow, Mid };

inline constexpr std::array<Quadrant, 5> kAllQuadrants = {Quadrant::EasyHigh, Quadrant::EasyLow, Quadrant::HardHigh,
                                                          Quadrant::HardLow, Quadrant::Mid};

std::string_view to_string(Quadrant q);
Quadrant parse_quadrant(std::string_view text);  // throws Error(Usage)
std::string_view difficulty_label(Tercile t);    // easy / mid / hard
std::string_view accuracy_label(Tercile t);      // high / mid / low

Direction difficulty_direction(Task task);  // CR/CT: low edit distance is easy; CDG: high overlap is easy

// Samples are put in one total order (value ascending, id ascending). The
// first floor(n/3) and the last floor(n/3) form the end terciles, the rest is
// Mid. LowIsEasy takes Easy from the front, HighIsEasy from the back.
// Throws Error(Empty) for n < 3.
std::vector<Tercile> tercile_split(const std::vector<double>& values, const std::vector<std::string>& ids,
                                   Direction direction);

Quadrant quadrant_of(Tercile difficulty, Tercile accuracy);

struct StratumRow {
  std::string id;
  double difficulty = 0.0;
  double bleu = 0.0;
  Tercile difficulty_tercile = Tercile::Mid;
  Tercile bleu_tercile = Tercile::Mid;
  Quadrant quadrant = Quadrant::Mid;
  ComplexityProfile complexity;
};

struct TercileCuts {
  double front_max = 0.0;  // largest value in the first (ascending) tercile
  double back_min = 0.0;   // smallest value in the last tercile
};

struct StratifiedCorpus {
  Task task = Task::CR;
  Direction direction = Direction::LowIsEasy;
  std::vector<StratumRow> rows;  // corpus order
  TercileCuts difficulty_cuts;
  TercileCuts bleu_cuts;
  std::array<std::size_t, 5> quadrant_counts{};  // indexed like kAllQuadrants

  std::size_t count(Quadrant q) const { return quadrant_counts[static_cast<std::size_t>(q)]; }
};

StratifiedCorpus label_quadrants(const std::vector<SampleMetrics>& metrics, Task task);

enum class Metric { Difficulty, Bleu, NTokens, Cyclomatic, NestedBlockDepth, NVariables };

inline constexpr std::array<Metric, 6> kAllMetrics = {Metric::Difficulty, Metric::Bleu,
                                                      Metric::NTokens,    Metric::Cyclomatic,
                                                      Metric::NestedBlockDepth, Metric::NVariables};

// File-name friendly metric name; Difficulty is "levenshtein" or "overlap" by task.
std::string metric_name(Metric metric, Task task);
double metric_value(const StratumRow& row, Metric metric);

struct HistogramPair {
  std::vector<double> edges;  // bins + 1 entries; a constant metric gives one bin [v, v]
  std::vector<std::size_t> whole_counts;
  std::vector<std::size_t> subset_counts;
  std::vector<double> whole_fraction;   // counts / total, sums to 1
  std::vector<double> subset_fraction;  // empty when the subset is empty
  bool subset_empty = false;
};

// Histograms of the whole corpus and one quadrant over shared equal-width
// bins spanning the whole corpus range. Throws Error(Usage) for bins == 0.
HistogramPair distribution_compare(Metric metric, const StratifiedCorpus& whole, Quadrant subset, std::size_t bins);

// subset - whole per high-level category.
HighLevelProfile category_attention_delta(const HighLevelProfile& whole, const HighLevelProfile& subset);

void write_labels_csv(const StratifiedCorpus& s, std::ostream& out);
void write_quadrants_csv(const StratifiedCorpus& s, std::ostream& out);
void write_histogram_csv(const HistogramPair& h, std::ostream& out);

}  // namespace attnlens
