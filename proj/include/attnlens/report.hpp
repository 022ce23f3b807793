#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attnlens/alignment.hpp"
#include "attnlens/attribution.hpp"
#include "attnlens/metrics.hpp"
#include "attnlens/rank.hpp"
#include "attnlens/stratifier.hpp"

namespace attnlens {

// "all", "last-3" or a comma-separated list of layer indices.
struct LayerSelection {
  enum class Mode { All, Last3, List } mode = Mode::All;
  std::vector<std::size_t> list;

  static LayerSelection parse(std::string_view text);  // throws Error(Usage)
  std::string to_string() const;
  // Concrete indices for a model with `num_layers` layers; throws Error(Usage) when out of range.
  std::vector<std::size_t> resolve(std::size_t num_layers) const;
};

struct RunConfig {
  Task task = Task::CR;
  Language language = Language::Java;
  std::string dump_path;
  std::string out_dir;
  LayerSelection layers;
  std::size_t k = 3;
  std::size_t bins = 10;
  bool strict = false;
  bool sample_weighted = false;  // rank means per sample first
  bool per_sample = false;       // attribution normalized per sample first
  DistanceUnit distance = DistanceUnit::Characters;
  std::size_t heatmap_samples = 20;

  // Canonical `key = value` text of the analysis settings (paths excluded).
  std::string canonical() const;
  std::uint64_t hash() const;
};

// Plain `key = value` lines; `#` starts a comment. Throws Error(Usage) on
// malformed lines or unknown keys.
std::map<std::string, std::string> parse_config_text(std::string_view text);
std::map<std::string, std::string> read_config_file(const std::string& path);
// Applies one config key to `cfg`; throws Error(Usage) for bad values.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

// Dump validation with strict-mode promotion. Returns the human-readable
// warnings that were tolerated; throws Error(Validation) otherwise.
std::vector<std::string> check_corpus(const Corpus& corpus, const std::optional<CorpusMeta>& meta, bool strict);

struct StrataResult {
  StratifiedCorpus strata;
  std::vector<std::pair<std::string, HistogramPair>> histograms;  // file stem -> histogram
  HighLevelProfile whole;
  std::optional<HighLevelProfile> easy_low;  // nullopt when the quadrant is empty or has no attention
  CategoryProfile whole_profile;
  std::optional<CategoryProfile> easy_low_profile;
};

StrataResult stratify(const std::vector<SampleMetrics>& metrics, const std::vector<AlignedSample>& aligned, Task task,
                      std::size_t bins, const std::vector<std::size_t>& layers, bool per_sample);

// Relative path -> file content.
using Artifacts = std::map<std::string, std::string>;

void add_strata_artifacts(Artifacts& files, const StrataResult& strata, const std::string& prefix);
std::string metrics_csv(const std::vector<SampleMetrics>& metrics, Task task);

// Writes all files under `dir`, creating directories as needed.
void write_artifacts(const Artifacts& files, const std::string& dir);

// Per-row min-max normalized heatmap of one (layer, step) as an HTML fragment.
// Throws Error(Usage) for out-of-range indices.
std::string render_heatmap(const AlignedSample& sample, std::size_t layer, std::size_t step);

// Opacities used by render_heatmap; all zero for a constant row.
std::vector<double> heatmap_opacities(std::span<const double> row);

struct PipelineResult {
  Artifacts files;
  std::vector<std::string> warnings;
};

// Computes every artifact in memory. Nothing touches the output directory.
PipelineResult compute_pipeline(const RunConfig& cfg);

// compute_pipeline + write_artifacts. On any failure no file is written.
PipelineResult run_pipeline(const RunConfig& cfg);

}  // namespace attnlens
