#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "attnlens/alignment.hpp"

namespace attnlens {

using CategoryValues = std::array<double, kNumCategories>;
using CategoryCounts = std::array<std::size_t, kNumCategories>;

inline std::size_t category_index(Category c) { return static_cast<std::size_t>(c); }

struct CategoryProfile {
  CategoryValues raw_mass{};
  CategoryCounts population{};
  CategoryValues per_token{};       // raw_mass / population, 0 for empty categories
  CategoryValues normalized_pct{};  // sums to 100
};

struct HighLevelProfile {
  double naming_pct = 0.0;      // MethodName + InputVariable + LocalVariable
  double structural_pct = 0.0;  // MethodCall + TypeIdentifier + LanguageKeyword
  double others_pct = 0.0;      // Other
};

struct Accumulation {
  std::vector<CategoryValues> raw_mass;  // per layer, summed over samples and steps
  CategoryCounts population{};           // token occurrences, once per sample
  std::vector<double> orphan_mass;       // per layer, excluded from every category
  std::size_t n_samples = 0;
};

// All samples must have the same layer count (Error(Dimension) otherwise).
Accumulation accumulate(const std::vector<AlignedSample>& aligned);
Accumulation accumulate_sample(const AlignedSample& sample);

// Throws Error(Degenerate) when every per-token score is zero.
CategoryProfile normalize(const CategoryValues& raw_mass, const CategoryCounts& population);

HighLevelProfile rollup(const CategoryProfile& profile);

// Mean of normalized_pct over layers, renormalized to 100. raw_mass and
// per_token are averaged too; population is taken from the first layer.
// Throws Error(Empty) for no layers.
CategoryProfile layer_average(const std::vector<CategoryProfile>& per_layer);

struct AttributionReport {
  std::vector<std::size_t> layers;         // selected layer indices
  std::vector<CategoryProfile> per_layer;  // parallel to `layers`
  CategoryProfile average;
  HighLevelProfile high_level;             // rollup of `average`
  std::vector<double> orphan_mass;         // parallel to `layers`
  bool per_sample = false;
};

// Corpus-global normalization per selected layer (all layers when `layers` is
// empty). With `per_sample`, each sample is normalized on its own and the
// percentages are averaged; samples with no attention on their tokens are
// skipped.
AttributionReport attribution_report(const std::vector<AlignedSample>& aligned,
                                     const std::vector<std::size_t>& layers = {}, bool per_sample = false);

void write_categories_csv(const AttributionReport& report, std::ostream& out);

}  // namespace attnlens
