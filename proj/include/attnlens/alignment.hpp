#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attnlens/code_parser.hpp"
#include "attnlens/dump_format.hpp"

namespace attnlens {

// Subword attention re-aggregated onto code tokens: each token's score is the
// mean over the subwords assigned to it. Rows no longer sum to one.
struct AlignedSample {
  std::string record_id;
  Task task = Task::CDG;
  Language source_language = Language::Java;
  std::string source_text;
  std::vector<std::string> output_steps;
  std::vector<CodeToken> code_tokens;
  std::vector<std::size_t> subword_counts;  // subwords assigned per code token
  Tensor3 attention;                        // [layers][steps][code tokens]
  std::vector<double> orphan_mass;          // [layer * steps + step], unassigned subword mass

  std::size_t num_layers() const noexcept { return attention.layers(); }
  std::size_t num_steps() const noexcept { return attention.steps(); }
  double orphan(std::size_t layer, std::size_t step) const {
    return orphan_mass[layer * attention.steps() + step];
  }

  bool operator==(const AlignedSample&) const = default;
};

using Assignment = std::vector<std::optional<std::size_t>>;

// Each subword goes to the code token with the largest byte overlap (earlier
// token on ties); subwords overlapping no token map to nullopt.
Assignment map_subwords(const std::vector<SubwordToken>& subwords, const std::vector<CodeToken>& code_tokens);

// Throws Error(Alignment) for subword spans outside the source text.
AlignedSample align(const SampleRecord& record, const std::vector<CodeToken>& code_tokens);

// Categorizes every record's source as `language` and aligns it. Runs over
// records in parallel; output order follows the corpus.
std::vector<AlignedSample> align_corpus(const Corpus& corpus, Language language);

void write_aligned(const std::vector<AlignedSample>& samples, std::ostream& out);
std::vector<AlignedSample> parse_aligned(std::istream& in);
std::vector<AlignedSample> read_aligned_file(const std::string& path);

}  // namespace attnlens
