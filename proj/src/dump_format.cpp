#include "attnlens/dump_format.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "json.hpp"

namespace attnlens {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

class LineParser {
 public:
  explicit LineParser(std::size_t line) : line_(line) {}

  [[noreturn]] void fail(std::string_view field, const std::string& what) const {
    throw Error(ErrorKind::Parse,
                "line " + std::to_string(line_) + ": field '" + std::string(field) + "': " + what);
  }

  const json& field(const json& obj, std::string_view key) const {
    const auto it = obj.find(std::string(key));
    if (it == obj.end()) fail(key, "missing");
    return *it;
  }

  std::string string_field(const json& obj, std::string_view key) const {
    const auto& v = field(obj, key);
    if (!v.is_string()) fail(key, "expected string");
    return v.get<std::string>();
  }

  std::size_t index_value(const json& v, std::string_view key) const {
    if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<long long>() < 0))
      fail(key, "expected non-negative integer");
    return v.get<std::size_t>();
  }

  SampleRecord record(const json& obj) const {
    if (!obj.is_object()) fail("<record>", "expected JSON object");
    SampleRecord r;
    r.id = string_field(obj, "id");
    try {
      r.task = parse_task(string_field(obj, "task"));
    } catch (const Error& e) {
      fail("task", e.what());
    }
    try {
      r.source_language = parse_language(string_field(obj, "source_language"));
    } catch (const Error& e) {
      fail("source_language", e.what());
    }
    r.source_text = string_field(obj, "source_text");
    r.gold_text = string_field(obj, "gold_text");
    r.prediction_text = string_field(obj, "prediction_text");

    const auto& steps = field(obj, "output_steps");
    if (!steps.is_array()) fail("output_steps", "expected array of strings");
    for (const auto& s : steps) {
      if (!s.is_string()) fail("output_steps", "expected array of strings");
      r.output_steps.push_back(s.get<std::string>());
    }

    const auto& subwords = field(obj, "subwords");
    if (!subwords.is_array()) fail("subwords", "expected array of [text, char_start, char_end]");
    for (const auto& sw : subwords) {
      if (!sw.is_array() || sw.size() != 3 || !sw[0].is_string())
        fail("subwords", "expected [text, char_start, char_end] triples");
      r.subwords.push_back({sw[0].get<std::string>(), index_value(sw[1], "subwords"), index_value(sw[2], "subwords")});
    }

    const auto& attention = field(obj, "attention");
    if (!attention.is_array()) fail("attention", "expected nested array [layers][steps][subwords]");
    const std::size_t layers = attention.size();
    const std::size_t n_steps = r.output_steps.size();
    const std::size_t width = r.subwords.size();
    if (layers == 0) throw Error(ErrorKind::Dimension, "record '" + r.id + "': attention has no layers");
    r.attention = Tensor3(layers, n_steps, width);
    for (std::size_t l = 0; l < layers; ++l) {
      const auto& layer = attention[l];
      if (!layer.is_array()) fail("attention", "expected nested array [layers][steps][subwords]");
      if (layer.size() != n_steps) {
        throw Error(ErrorKind::Dimension, "record '" + r.id + "': layer " + std::to_string(l) + " has " +
                                              std::to_string(layer.size()) + " step rows, expected " +
                                              std::to_string(n_steps) + " (len(output_steps))");
      }
      for (std::size_t s = 0; s < n_steps; ++s) {
        const auto& row = layer[s];
        if (!row.is_array()) fail("attention", "expected nested array [layers][steps][subwords]");
        if (row.size() != width) {
          throw Error(ErrorKind::Dimension, "record '" + r.id + "': layer " + std::to_string(l) + " step " +
                                                std::to_string(s) + " has width " + std::to_string(row.size()) +
                                                ", expected " + std::to_string(width) + " (len(subwords))");
        }
        auto out = r.attention.row(l, s);
        for (std::size_t w = 0; w < width; ++w) {
          if (!row[w].is_number()) fail("attention", "expected number");
          out[w] = row[w].get<double>();
        }
      }
    }
    return r;
  }

 private:
  std::size_t line_;
};

ordered_json record_json(const SampleRecord& r) {
  ordered_json obj;
  obj["id"] = r.id;
  obj["task"] = to_string(r.task);
  obj["source_language"] = to_string(r.source_language);
  obj["source_text"] = r.source_text;
  obj["gold_text"] = r.gold_text;
  obj["prediction_text"] = r.prediction_text;
  obj["output_steps"] = r.output_steps;
  auto subwords = ordered_json::array();
  for (const auto& sw : r.subwords) subwords.push_back(ordered_json::array({sw.text, sw.char_start, sw.char_end}));
  obj["subwords"] = std::move(subwords);
  auto attention = ordered_json::array();
  for (std::size_t l = 0; l < r.attention.layers(); ++l) {
    auto layer = ordered_json::array();
    for (std::size_t s = 0; s < r.attention.steps(); ++s) {
      const auto row = r.attention.row(l, s);
      layer.push_back(ordered_json(std::vector<double>(row.begin(), row.end())));
    }
    attention.push_back(std::move(layer));
  }
  obj["attention"] = std::move(attention);
  return obj;
}

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

}  // namespace

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::StepCount: return "step_count";
    case ViolationKind::SubwordCount: return "subword_count";
    case ViolationKind::SpanBounds: return "span_bounds";
    case ViolationKind::SpanOrder: return "span_order";
    case ViolationKind::Range: return "range";
    case ViolationKind::RowSum: return "row_sum";
  }
  return "unknown";
}

std::vector<Violation> validate_record(const SampleRecord& record) {
  std::vector<Violation> out;
  const auto& att = record.attention;
  if (att.steps() != record.output_steps.size()) {
    out.push_back({ViolationKind::StepCount, Severity::Error, std::nullopt, std::nullopt, std::nullopt,
                   "attention has " + std::to_string(att.steps()) + " steps but output_steps has " +
                       std::to_string(record.output_steps.size())});
  }
  if (att.width() != record.subwords.size()) {
    out.push_back({ViolationKind::SubwordCount, Severity::Error, std::nullopt, std::nullopt, std::nullopt,
                   "attention width " + std::to_string(att.width()) + " but " +
                       std::to_string(record.subwords.size()) + " subwords"});
  }
  for (std::size_t i = 0; i < record.subwords.size(); ++i) {
    const auto& sw = record.subwords[i];
    if (sw.char_start >= sw.char_end || sw.char_end > record.source_text.size()) {
      out.push_back({ViolationKind::SpanBounds, Severity::Error, std::nullopt, std::nullopt, i,
                     "subword " + std::to_string(i) + " span [" + std::to_string(sw.char_start) + ", " +
                         std::to_string(sw.char_end) + ") invalid for source of " +
                         std::to_string(record.source_text.size()) + " bytes"});
    }
    if (i > 0 && sw.char_start < record.subwords[i - 1].char_start) {
      out.push_back({ViolationKind::SpanOrder, Severity::Error, std::nullopt, std::nullopt, i,
                     "subword " + std::to_string(i) + " starts before its predecessor"});
    }
  }
  for (std::size_t l = 0; l < att.layers(); ++l) {
    for (std::size_t s = 0; s < att.steps(); ++s) {
      const auto row = att.row(l, s);
      double sum = 0.0;
      for (std::size_t w = 0; w < row.size(); ++w) {
        const double v = row[w];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
          out.push_back({ViolationKind::Range, Severity::Warning, l, s, w,
                         "value " + std::to_string(v) + " outside [0, 1]"});
        }
        sum += v;
      }
      if (!(std::abs(sum - 1.0) <= kRowSumTolerance)) {
        out.push_back({ViolationKind::RowSum, Severity::Warning, l, s, std::nullopt,
                       "row sum " + std::to_string(sum) + " outside 1 +- " + std::to_string(kRowSumTolerance)});
      }
    }
  }
  return out;
}

void check_language(const SampleRecord& record, Language language) {
  if (record.source_language != language) {
    throw Error(ErrorKind::Usage, "record '" + record.id + "' has source_language " +
                                      std::string(to_string(record.source_language)) + ", not " +
                                      std::string(to_string(language)));
  }
}

Corpus parse_dump(std::istream& in) {
  Corpus corpus;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": malformed JSON: " + e.what());
    }
    const LineParser parser(line_no);
    auto record = parser.record(obj);
    if (corpus.records.empty()) {
      corpus.task = record.task;
    } else if (record.task != corpus.task) {
      parser.fail("task", "record '" + record.id + "' has task " + std::string(to_string(record.task)) +
                              " but the corpus is " + std::string(to_string(corpus.task)));
    }
    if (!ids.insert(record.id).second) parser.fail("id", "duplicate record id '" + record.id + "'");
    corpus.records.push_back(std::move(record));
  }
  if (in.bad()) throw Error(ErrorKind::Io, "read failure");
  return corpus;
}

Corpus read_dump_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open dump '" + path + "'");
  return parse_dump(in);
}

void write_dump(const Corpus& corpus, std::ostream& out) {
  for (const auto& record : corpus.records) {
    try {
      out << record_json(record).dump() << '\n';
    } catch (const nlohmann::json::type_error& e) {
      throw Error(ErrorKind::Parse, "record '" + record.id + "': " + e.what());
    }
  }
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failure");
}

void write_dump_file(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  write_dump(corpus, out);
}

CorpusMeta parse_meta(std::istream& in) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("meta sidecar: malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw Error(ErrorKind::Parse, "meta sidecar: expected JSON object");
  CorpusMeta meta;
  try {
    if (obj.contains("model_name")) meta.model_name = obj.at("model_name").get<std::string>();
    if (obj.contains("num_layers")) meta.num_layers = obj.at("num_layers").get<std::size_t>();
    if (obj.contains("beam_size")) meta.beam_size = obj.at("beam_size").get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("meta sidecar: ") + e.what());
  }
  return meta;
}

void write_meta(const CorpusMeta& meta, std::ostream& out) {
  ordered_json obj;
  obj["model_name"] = meta.model_name;
  obj["num_layers"] = meta.num_layers;
  obj["beam_size"] = meta.beam_size;
  out << obj.dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failure");
}

std::optional<CorpusMeta> read_meta_sidecar(const std::string& dump_path) {
  std::string base = dump_path;
  if (base.size() >= 6 && base.compare(base.size() - 6, 6, ".jsonl") == 0) base.resize(base.size() - 6);
  const auto path = base + ".meta.json";
  if (!std::filesystem::exists(path)) return std::nullopt;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return parse_meta(in);
}

}  // namespace attnlens
