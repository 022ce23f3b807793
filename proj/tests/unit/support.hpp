#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "attnlens/alignment.hpp"
#include "attnlens/code_parser.hpp"
#include "attnlens/dump_format.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) {
  return std::string(ATTNLENS_SOURCE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string fixture(const std::string& rel) {
  return read_file(source_path("tests/fixtures/" + rel));
}

// One subword per code token, so aligned attention equals raw attention.
inline std::vector<attnlens::SubwordToken> subwords_from_tokens(const std::vector<attnlens::CodeToken>& tokens) {
  std::vector<attnlens::SubwordToken> out;
  for (const auto& t : tokens) out.push_back({t.text, t.char_start, t.char_end});
  return out;
}

inline attnlens::SampleRecord make_record(std::string id, std::string source, std::vector<attnlens::SubwordToken> subwords,
                                          std::vector<std::string> steps, std::size_t layers,
                                          attnlens::Language lang = attnlens::Language::Java,
                                          attnlens::Task task = attnlens::Task::CR) {
  attnlens::SampleRecord r;
  r.id = std::move(id);
  r.task = task;
  r.source_language = lang;
  r.source_text = std::move(source);
  r.gold_text = "gold";
  r.prediction_text = "prediction";
  r.output_steps = std::move(steps);
  r.subwords = std::move(subwords);
  r.attention = attnlens::Tensor3(layers, r.output_steps.size(), r.subwords.size());
  return r;
}

// Fills every row with a random softmax-like distribution.
inline void random_rows(attnlens::Tensor3& t, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t l = 0; l < t.layers(); ++l) {
    for (std::size_t s = 0; s < t.steps(); ++s) {
      auto row = t.row(l, s);
      double sum = 0.0;
      for (auto& v : row) sum += (v = u(rng) + 1e-3);
      for (auto& v : row) v /= sum;
    }
  }
}

inline void uniform_rows(attnlens::Tensor3& t) {
  for (auto& v : t.values()) v = 1.0 / static_cast<double>(t.width());
}

inline attnlens::AlignedSample aligned_from_row(const std::vector<double>& row, const std::vector<std::string>& texts,
                                                const std::string& step) {
  attnlens::AlignedSample a;
  a.record_id = "s";
  std::size_t pos = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    a.code_tokens.push_back({texts[i], pos, pos + texts[i].size(), attnlens::Category::Other, i});
    pos += texts[i].size() + 1;
    a.source_text += texts[i] + " ";
  }
  a.subword_counts.assign(texts.size(), 1);
  a.output_steps = {step};
  a.attention = attnlens::Tensor3(1, 1, row.size());
  for (std::size_t i = 0; i < row.size(); ++i) a.attention(0, 0, i) = row[i];
  a.orphan_mass.assign(1, 0.0);
  return a;
}

}  // namespace testing
