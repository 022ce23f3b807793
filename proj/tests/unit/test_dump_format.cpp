#include <algorithm>
#include <filesystem>
#include <sstream>

#include "attnlens/dump_format.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace attnlens;

namespace {

const char* kMinimal =
    R"({"id":"a","task":"CDG","source_language":"python","source_text":"x","gold_text":"g","prediction_text":"p",)"
    R"("output_steps":["x"],"subwords":[["x",0,1]],"attention":[[[1.0]]]})";

Corpus parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_dump(in);
}

std::string write_text(const Corpus& c) {
  std::ostringstream out;
  write_dump(c, out);
  return out.str();
}

ErrorKind error_kind(const std::string& text, std::string* message = nullptr) {
  try {
    parse_text(text);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Io;
}

std::size_t count_kind(const std::vector<Violation>& v, ViolationKind kind) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [&](const Violation& x) { return x.kind == kind; }));
}

Corpus random_corpus(std::mt19937_64& rng) {
  Corpus c;
  c.task = Task::CT;
  std::uniform_int_distribution<int> small(1, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int n = small(rng);
  for (int i = 0; i < n; ++i) {
    SampleRecord r;
    r.id = "rec-" + std::to_string(i) + "\t\"q\"";
    r.task = Task::CT;
    r.source_language = i % 2 ? Language::CSharp : Language::Java;
    r.source_text = "int f() { return \"\xC3\xA9\\n\"; }";
    r.gold_text = "gold \xE2\x82\xAC";
    r.prediction_text = "";
    const int steps = small(rng) - 1;
    for (int s = 0; s < steps; ++s) r.output_steps.push_back("\xC4\xA0tok" + std::to_string(s));
    const int width = small(rng);
    for (int w = 0; w < width; ++w) r.subwords.push_back({"p" + std::to_string(w), std::size_t(w), std::size_t(w) + 1});
    r.attention = Tensor3(small(rng), steps, width);
    for (auto& v : r.attention.values()) v = u(rng);
    c.records.push_back(std::move(r));
  }
  return c;
}

}  // namespace

TEST_CASE("one-record file with a 1x1x1 attention array") {
  const auto c = parse_text(kMinimal);
  REQUIRE(c.records.size() == 1);
  CHECK(c.task == Task::CDG);
  CHECK(c.records[0].attention(0, 0, 0) == 1.0);
  CHECK(validate_record(c.records[0]).empty());
}

TEST_CASE("width mismatch is a dimension error naming the record") {
  const std::string text =
      R"({"id":"bad-rec","task":"CR","source_language":"java","source_text":"abc","gold_text":"","prediction_text":"",)"
      R"("output_steps":["a"],"subwords":[["a",0,1],["b",1,2],["c",2,3]],"attention":[[[0.5,0.5]]]})";
  std::string msg;
  CHECK(error_kind(text, &msg) == ErrorKind::Dimension);
  CHECK(msg.find("bad-rec") != std::string::npos);
}

TEST_CASE("step count mismatch is a dimension error") {
  const std::string text =
      R"({"id":"s","task":"CR","source_language":"java","source_text":"a","gold_text":"","prediction_text":"",)"
      R"("output_steps":["a","b"],"subwords":[["a",0,1]],"attention":[[[1.0]]]})";
  CHECK(error_kind(text) == ErrorKind::Dimension);
}

TEST_CASE("malformed lines name the line number and field") {
  std::string msg;
  CHECK(error_kind(std::string(kMinimal) + "\n{not json\n", &msg) == ErrorKind::Parse);
  CHECK(msg.find("line 2") != std::string::npos);

  std::string missing = kMinimal;
  missing.replace(missing.find("\"gold_text\""), 4, "\"xx");
  CHECK(error_kind(missing, &msg) == ErrorKind::Parse);
  CHECK(msg.find("line 1") != std::string::npos);
  CHECK(msg.find("gold_text") != std::string::npos);

  std::string bad_task = kMinimal;
  bad_task.replace(bad_task.find("CDG"), 3, "XYZ");
  CHECK(error_kind(bad_task, &msg) == ErrorKind::Parse);
  CHECK(msg.find("task") != std::string::npos);

  std::string negative = kMinimal;
  negative.replace(negative.find("[\"x\",0,1]"), 9, "[\"x\",-1,1]");
  CHECK(error_kind(negative, &msg) == ErrorKind::Parse);
  CHECK(msg.find("subwords") != std::string::npos);
}

TEST_CASE("corpus-level invariants: unique ids and one task") {
  std::string msg;
  CHECK(error_kind(std::string(kMinimal) + "\n" + kMinimal + "\n", &msg) == ErrorKind::Parse);
  CHECK(msg.find("duplicate") != std::string::npos);

  std::string other = kMinimal;
  other.replace(other.find("\"a\""), 3, "\"b\"");
  other.replace(other.find("CDG"), 3, "CR");
  CHECK(error_kind(std::string(kMinimal) + "\n" + other + "\n", &msg) == ErrorKind::Parse);
}

TEST_CASE("blank lines are skipped and unknown keys ignored") {
  std::string extra = kMinimal;
  extra.insert(1, R"("truncated":true,)");
  const auto c = parse_text("\n" + extra + "\n\n");
  CHECK(c.records.size() == 1);
}

TEST_CASE("bundled fixture parses to r1..r9 and validates") {
  const auto c = read_dump_file(testing::source_path("tests/fixtures/mini_cr.jsonl"));
  REQUIRE(c.records.size() == 9);
  CHECK(c.task == Task::CR);
  for (std::size_t i = 0; i < 9; ++i) {
    CHECK(c.records[i].id == "r" + std::to_string(i + 1));
    CHECK(validate_record(c.records[i]).empty());
  }
  const auto meta = read_meta_sidecar(testing::source_path("tests/fixtures/mini_cr.jsonl"));
  REQUIRE(meta.has_value());
  CHECK(meta->num_layers == 3);
}

TEST_CASE("write_dump: empty corpus, one line per record") {
  CHECK(write_text(Corpus{}).empty());
  const auto one = write_text(parse_text(kMinimal));
  CHECK(std::count(one.begin(), one.end(), '\n') == 1);
}

TEST_CASE("fixture round-trips and is byte-stable after one normalization pass") {
  const auto raw = testing::fixture("mini_cr.jsonl");
  const auto c = parse_text(raw);
  const auto once = write_text(c);
  CHECK(parse_text(once) == c);
  CHECK(write_text(parse_text(once)) == once);
}

TEST_CASE("round-trip property on random corpora") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = random_corpus(rng);
    CHECK(parse_text(write_text(c)) == c);
  }
}

TEST_CASE("sink failure surfaces as an I/O error") {
  std::ostringstream out;
  out.setstate(std::ios::badbit);
  try {
    write_dump(parse_text(kMinimal), out);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
}

TEST_CASE("validate_record examples") {
  auto r = testing::make_record("v", "ab", {{"a", 0, 1}, {"b", 1, 2}}, {"x"}, 1);
  r.attention(0, 0, 0) = 0.25;
  r.attention(0, 0, 1) = 0.25;
  auto v = validate_record(r);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::RowSum);
  CHECK(v[0].layer == 0u);
  CHECK(v[0].step == 0u);
  CHECK(v[0].severity == Severity::Warning);

  r.attention(0, 0, 0) = 1.2;
  r.attention(0, 0, 1) = 0.0;
  v = validate_record(r);
  CHECK(count_kind(v, ViolationKind::Range) == 1);
  CHECK(v.front().index == 0u);
}

TEST_CASE("validation completeness: every single mutation is reported") {
  const auto corpus = read_dump_file(testing::source_path("tests/fixtures/mini_cr.jsonl"));
  std::mt19937_64 rng(11);
  for (const auto& base : corpus.records) {
    for (int m = 0; m < 8; ++m) {
      auto r = base;
      std::uniform_int_distribution<std::size_t> pick_sw(0, r.subwords.size() - 1);
      std::uniform_int_distribution<std::size_t> pick_step(0, r.output_steps.size() - 1);
      const auto w = pick_sw(rng);
      const auto s = pick_step(rng);
      switch (m) {
        case 0: r.output_steps.pop_back(); break;
        case 1: r.output_steps.push_back("extra"); break;
        case 2: r.subwords.push_back({"x", 0, 1}); break;
        case 3: r.subwords[w].char_end = r.source_text.size() + 1; break;
        case 4: r.subwords[w].char_start = r.subwords[w].char_end; break;
        case 5: std::swap(r.subwords.front(), r.subwords.back()); break;
        case 6: r.attention(0, s, w) += 0.5; break;
        case 7: r.attention(2, s, w) = -0.01; break;
      }
      CHECK_MESSAGE(!validate_record(r).empty(), base.id << " mutation " << m);
    }
  }
}

TEST_CASE("meta sidecar round trip and path mapping") {
  CorpusMeta meta{"toy-model", 6, 10};
  std::stringstream buf;
  write_meta(meta, buf);
  CHECK(parse_meta(buf) == meta);

  const auto dir = std::filesystem::temp_directory_path() / "attnlens_meta_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "d.meta.json");
    write_meta(meta, out);
  }
  CHECK(read_meta_sidecar((dir / "d.jsonl").string()) == meta);
  CHECK_FALSE(read_meta_sidecar((dir / "none.jsonl").string()).has_value());
  std::filesystem::remove_all(dir);
}
