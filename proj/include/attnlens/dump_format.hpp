#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "attnlens/common.hpp"

namespace attnlens {

// A model-tokenizer piece with its byte span in the UTF-8 source text.
struct SubwordToken {
  std::string text;
  std::size_t char_start = 0;
  std::size_t char_end = 0;  // exclusive

  bool operator==(const SubwordToken&) const = default;
};

// One model run: inputs, outputs, and head-averaged cross-attention
// attention(layer, step, subword).
struct SampleRecord {
  std::string id;
  Task task = Task::CDG;
  Language source_language = Language::Java;
  std::string source_text;
  std::string gold_text;
  std::string prediction_text;
  std::vector<std::string> output_steps;
  std::vector<SubwordToken> subwords;
  Tensor3 attention;

  std::size_t num_layers() const noexcept { return attention.layers(); }

  bool operator==(const SampleRecord&) const = default;
};

struct Corpus {
  Task task = Task::CDG;
  std::vector<SampleRecord> records;

  bool operator==(const Corpus&) const = default;
};

// Optional `<dump>.meta.json` sidecar.
struct CorpusMeta {
  std::string model_name;
  std::size_t num_layers = 0;
  std::size_t beam_size = 0;

  bool operator==(const CorpusMeta&) const = default;
};

inline constexpr double kRowSumTolerance = 1e-3;

enum class ViolationKind {
  StepCount,     // attention steps != output_steps
  SubwordCount,  // attention width != subwords
  SpanBounds,    // char_start >= char_end or char_end > len(source)
  SpanOrder,     // char_start decreases
  Range,         // value outside [0, 1] or not finite
  RowSum,        // row sum outside [1 - eps, 1 + eps]
};

enum class Severity { Warning, Error };

struct Violation {
  ViolationKind kind;
  Severity severity;
  std::optional<std::size_t> layer;
  std::optional<std::size_t> step;
  std::optional<std::size_t> index;  // subword index where applicable
  std::string message;
};

std::string_view to_string(ViolationKind kind);

// Checks every SampleRecord invariant. Row-sum and range problems are
// warnings (the caller promotes them under --strict); shape and span
// problems are errors.
std::vector<Violation> validate_record(const SampleRecord& record);

// Throws Error(Usage) when the record's source language is not `language`.
void check_language(const SampleRecord& record, Language language);

// Parses line-delimited JSON records. Throws Error(Parse) naming the line and
// field, Error(Dimension) naming the record id.
Corpus parse_dump(std::istream& in);
Corpus read_dump_file(const std::string& path);

void write_dump(const Corpus& corpus, std::ostream& out);
void write_dump_file(const Corpus& corpus, const std::string& path);

CorpusMeta parse_meta(std::istream& in);
void write_meta(const CorpusMeta& meta, std::ostream& out);
// Loads `<dump_path minus .jsonl>.meta.json` when present.
std::optional<CorpusMeta> read_meta_sidecar(const std::string& dump_path);

}  // namespace attnlens
