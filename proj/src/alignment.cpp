#include "attnlens/alignment.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include "attnlens/parallel.hpp"
#include "json.hpp"

namespace attnlens {

Assignment map_subwords(const std::vector<SubwordToken>& subwords, const std::vector<CodeToken>& code_tokens) {
  Assignment out(subwords.size());
  std::size_t first = 0;
  for (std::size_t w = 0; w < subwords.size(); ++w) {
    const auto& sw = subwords[w];
    while (first < code_tokens.size() && code_tokens[first].char_end <= sw.char_start) ++first;
    std::size_t best_overlap = 0;
    for (std::size_t t = first; t < code_tokens.size() && code_tokens[t].char_start < sw.char_end; ++t) {
      const auto lo = std::max(sw.char_start, code_tokens[t].char_start);
      const auto hi = std::min(sw.char_end, code_tokens[t].char_end);
      const std::size_t overlap = hi > lo ? hi - lo : 0;
      if (overlap > best_overlap) {
        best_overlap = overlap;
        out[w] = t;
      }
    }
  }
  return out;
}

AlignedSample align(const SampleRecord& record, const std::vector<CodeToken>& code_tokens) {
  const auto& raw = record.attention;
  if (raw.width() != record.subwords.size() || raw.steps() != record.output_steps.size()) {
    throw Error(ErrorKind::Dimension, "record '" + record.id + "': attention shape does not match record");
  }
  for (std::size_t w = 0; w < record.subwords.size(); ++w) {
    const auto& sw = record.subwords[w];
    if (sw.char_end > record.source_text.size() || sw.char_start >= sw.char_end) {
      throw Error(ErrorKind::Alignment, "record '" + record.id + "': subword " + std::to_string(w) + " '" +
                                            sw.text + "' span [" + std::to_string(sw.char_start) + ", " +
                                            std::to_string(sw.char_end) + ") is outside the source (" +
                                            std::to_string(record.source_text.size()) + " bytes)");
    }
  }

  AlignedSample out;
  out.record_id = record.id;
  out.task = record.task;
  out.source_language = record.source_language;
  out.source_text = record.source_text;
  out.output_steps = record.output_steps;
  out.code_tokens = code_tokens;
  out.subword_counts.assign(code_tokens.size(), 0);
  out.attention = Tensor3(raw.layers(), raw.steps(), code_tokens.size());
  out.orphan_mass.assign(raw.layers() * raw.steps(), 0.0);

  const auto assignment = map_subwords(record.subwords, code_tokens);
  for (const auto& a : assignment) {
    if (a) ++out.subword_counts[*a];
  }
  for (std::size_t l = 0; l < raw.layers(); ++l) {
    for (std::size_t s = 0; s < raw.steps(); ++s) {
      const auto in = raw.row(l, s);
      auto dst = out.attention.row(l, s);
      double orphan = 0.0;
      for (std::size_t w = 0; w < in.size(); ++w) {
        if (assignment[w]) {
          dst[*assignment[w]] += in[w];
        } else {
          orphan += in[w];
        }
      }
      for (std::size_t t = 0; t < dst.size(); ++t) {
        if (out.subword_counts[t] > 0) dst[t] /= static_cast<double>(out.subword_counts[t]);
      }
      out.orphan_mass[l * raw.steps() + s] = orphan;
    }
  }
  return out;
}

std::vector<AlignedSample> align_corpus(const Corpus& corpus, Language language) {
  std::vector<AlignedSample> out(corpus.records.size());
  parallel_for(corpus.records.size(), [&](std::size_t i) {
    const auto& record = corpus.records[i];
    check_language(record, language);
    std::vector<CodeToken> tokens;
    try {
      tokens = categorize(record.source_text, language);
    } catch (const Error& e) {
      throw Error(e.kind(), "record '" + record.id + "': " + e.what());
    }
    out[i] = align(record, tokens);
  });
  return out;
}

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void aligned_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Parse, "aligned line " + std::to_string(line) + ": " + what);
}

}  // namespace

void write_aligned(const std::vector<AlignedSample>& samples, std::ostream& out) {
  for (const auto& a : samples) {
    ordered_json obj;
    obj["id"] = a.record_id;
    obj["task"] = to_string(a.task);
    obj["source_language"] = to_string(a.source_language);
    obj["source_text"] = a.source_text;
    obj["output_steps"] = a.output_steps;
    auto tokens = ordered_json::array();
    for (std::size_t t = 0; t < a.code_tokens.size(); ++t) {
      const auto& tok = a.code_tokens[t];
      tokens.push_back(ordered_json::array(
          {tok.text, tok.char_start, tok.char_end, to_string(tok.category), a.subword_counts[t]}));
    }
    obj["code_tokens"] = std::move(tokens);
    auto attention = ordered_json::array();
    auto orphan = ordered_json::array();
    for (std::size_t l = 0; l < a.attention.layers(); ++l) {
      auto layer = ordered_json::array();
      auto orphan_layer = ordered_json::array();
      for (std::size_t s = 0; s < a.attention.steps(); ++s) {
        const auto row = a.attention.row(l, s);
        layer.push_back(ordered_json(std::vector<double>(row.begin(), row.end())));
        orphan_layer.push_back(a.orphan(l, s));
      }
      attention.push_back(std::move(layer));
      orphan.push_back(std::move(orphan_layer));
    }
    obj["attention"] = std::move(attention);
    obj["orphan_mass"] = std::move(orphan);
    out << obj.dump() << '\n';
  }
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failure");
}

std::vector<AlignedSample> parse_aligned(std::istream& in) {
  std::vector<AlignedSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    AlignedSample a;
    try {
      const auto obj = json::parse(line);
      a.record_id = obj.at("id").get<std::string>();
      a.task = parse_task(obj.at("task").get<std::string>());
      a.source_language = parse_language(obj.at("source_language").get<std::string>());
      a.source_text = obj.at("source_text").get<std::string>();
      a.output_steps = obj.at("output_steps").get<std::vector<std::string>>();
      for (const auto& tok : obj.at("code_tokens")) {
        if (!tok.is_array() || tok.size() != 5) aligned_fail(line_no, "code_tokens entries must have 5 fields");
        CodeToken ct;
        ct.text = tok[0].get<std::string>();
        ct.char_start = tok[1].get<std::size_t>();
        ct.char_end = tok[2].get<std::size_t>();
        ct.category = parse_category(tok[3].get<std::string>());
        ct.index = a.code_tokens.size();
        a.code_tokens.push_back(std::move(ct));
        a.subword_counts.push_back(tok[4].get<std::size_t>());
      }
      const auto& att = obj.at("attention");
      const auto& orphan = obj.at("orphan_mass");
      const std::size_t layers = att.size();
      const std::size_t steps = a.output_steps.size();
      const std::size_t width = a.code_tokens.size();
      if (orphan.size() != layers) aligned_fail(line_no, "orphan_mass layer count differs from attention");
      a.attention = Tensor3(layers, steps, width);
      a.orphan_mass.assign(layers * steps, 0.0);
      for (std::size_t l = 0; l < layers; ++l) {
        if (att[l].size() != steps || orphan[l].size() != steps) {
          throw Error(ErrorKind::Dimension, "aligned record '" + a.record_id + "': layer " + std::to_string(l) +
                                                " does not have one row per output step");
        }
        for (std::size_t s = 0; s < steps; ++s) {
          const auto& row = att[l][s];
          if (row.size() != width) {
            throw Error(ErrorKind::Dimension, "aligned record '" + a.record_id + "': row width " +
                                                  std::to_string(row.size()) + " != " + std::to_string(width) +
                                                  " code tokens");
          }
          auto dst = a.attention.row(l, s);
          for (std::size_t t = 0; t < width; ++t) dst[t] = row[t].get<double>();
          a.orphan_mass[l * steps + s] = orphan[l][s].get<double>();
        }
      }
    } catch (const json::exception& e) {
      aligned_fail(line_no, e.what());
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<AlignedSample> read_aligned_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open aligned file '" + path + "'");
  return parse_aligned(in);
}

}  // namespace attnlens
