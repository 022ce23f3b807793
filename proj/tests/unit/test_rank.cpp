#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "attnlens/rank.hpp"
#include "attnlens/reference.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace attnlens;

namespace {

AlignedSample random_sample(std::mt19937_64& rng, std::size_t n_tokens, std::size_t layers, std::size_t steps,
                            const std::string& id) {
  static const std::vector<std::string> vocab = {"a", "B", "c", "d", "if", "x", "Get", "get", "(", ")"};
  AlignedSample a;
  a.record_id = id;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n_tokens; ++i) {
    const auto& text = vocab[rng() % vocab.size()];
    a.code_tokens.push_back({text, pos, pos + text.size(), Category::Other, i});
    a.source_text += text + " ";
    pos += text.size() + 1;
  }
  a.subword_counts.assign(n_tokens, 1);
  for (std::size_t s = 0; s < steps; ++s) a.output_steps.push_back(vocab[rng() % vocab.size()]);
  a.attention = Tensor3(layers, steps, n_tokens);
  // Coarse values so ties happen often.
  for (auto& v : a.attention.values()) v = static_cast<double>(rng() % 5) / 10.0;
  a.orphan_mass.assign(layers * steps, 0.0);
  return a;
}

// Stable sort of indices by score descending; position of the first match.
std::optional<std::size_t> sorted_rank(std::span<const double> row, const std::vector<std::string>& keys,
                                       const std::string& target) {
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return row[x] > row[y]; });
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (keys[order[i]] == target) return i + 1;
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("match keys fold case and strip space markers") {
  CHECK(match_key("Foo") == "foo");
  CHECK(match_key("\xC4\xA0return") == "return");
  CHECK(match_key("  x\n") == "x");
  CHECK(match_key("\xC4\xA0") == "");
  CHECK(match_key("Ünï") == "Ünï");
}

TEST_CASE("single input token equal to the output") {
  const auto a = testing::aligned_from_row({0.7}, {"x"}, "X");
  const auto obs = rank_observations(a);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].rank_1based == 1);
  CHECK(obs[0].normalized_rank == 0.0);
  CHECK(obs[0].n_input_tokens == 1);
  const auto report = rank_report({a});
  CHECK_FALSE(report.empty);
  CHECK(*report.layers[0].mean_normalized_rank == 0.0);
  CHECK(*report.layers[0].topk_hit_rate == 1.0);
}

TEST_CASE("equal attention ranks the first matching token first") {
  std::vector<std::string> texts = {"m", "a", "b", "c", "d", "e", "f", "g", "h", "i"};
  const auto a = testing::aligned_from_row(std::vector<double>(10, 0.1), texts, "m");
  const auto obs = rank_observations(a);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].rank_1based == 1);
  CHECK(obs[0].normalized_rank == 0.0);
  CHECK(rank_of(std::vector<double>(10, 0.1), 9) == 10);
}

TEST_CASE("hand-sorted four-token row") {
  const auto a = testing::aligned_from_row({0.1, 0.4, 0.3, 0.2}, {"p", "q", "r", "s"}, "r");
  const auto obs = rank_observations(a);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].matched_token_index == 2);
  CHECK(obs[0].rank_1based == 2);
  CHECK(obs[0].normalized_rank == doctest::Approx(25.0));
}

TEST_CASE("best rank among several matches") {
  const auto a = testing::aligned_from_row({0.1, 0.5, 0.3, 0.2}, {"x", "y", "z", "X"}, "x");
  const auto obs = rank_observations(a);
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].matched_token_index == 3);
  CHECK(obs[0].rank_1based == 3);
}

TEST_CASE("steps without a match produce no observation") {
  const auto a = testing::aligned_from_row({0.5, 0.5}, {"a", "b"}, "c");
  CHECK(rank_observations(a).empty());
  const auto report = rank_report({a});
  CHECK(report.empty);
  CHECK_FALSE(report.layers[0].mean_normalized_rank.has_value());
  CHECK_FALSE(report.layers[0].topk_hit_rate.has_value());
  std::ostringstream csv;
  write_rank_csv(report, csv);
  CHECK(csv.str() == "layer,mean_normalized_rank,topk_hit_rate,n_observations\n0,,,0\n");
  CHECK(rank_report({}).empty);
}

TEST_CASE("repeated token ratio") {
  AlignedSample none = testing::aligned_from_row({0.5, 0.5}, {"a", "b"}, "c");
  CHECK(repeated_token_ratio({none}) == 0.0);
  AlignedSample copy = testing::aligned_from_row({0.5, 0.5}, {"a", "b"}, "a");
  copy.output_steps = {"a", "B"};
  copy.attention = Tensor3(1, 2, 2, 0.5);
  CHECK(repeated_token_ratio({copy}) == 1.0);
  CHECK(repeated_token_ratio({copy, none}) == doctest::Approx(2.0 / 3.0));
  CHECK(repeated_token_ratio({}) == 0.0);
}

TEST_CASE("planted argmax gives mean zero and full hit rate in every layer") {
  std::mt19937_64 rng(3);
  std::vector<AlignedSample> corpus;
  for (int i = 0; i < 30; ++i) {
    auto a = random_sample(rng, 2 + rng() % 20, 4, 1 + rng() % 6, "p" + std::to_string(i));
    for (std::size_t s = 0; s < a.num_steps(); ++s) {
      const std::size_t target = rng() % a.code_tokens.size();
      a.output_steps[s] = a.code_tokens[target].text;
      for (std::size_t l = 0; l < a.num_layers(); ++l) a.attention(l, s, target) = 2.0;
    }
    corpus.push_back(std::move(a));
  }
  const auto report = rank_report(corpus, 3);
  for (const auto& layer : report.layers) {
    CHECK(*layer.mean_normalized_rank == 0.0);
    CHECK(*layer.topk_hit_rate == 1.0);
  }
}

TEST_CASE("scale invariance and adding a lower-scored token") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_sample(rng, 1 + rng() % 12, 2, 3, "s");
    auto scaled = a;
    const double c = 0.25 + static_cast<double>(rng() % 100);
    for (auto& v : scaled.attention.values()) v *= c;
    CHECK(rank_observations(scaled) == rank_observations(a));

    auto grown = a;
    grown.code_tokens.push_back({"zz_extra", 0, 1, Category::Other, a.code_tokens.size()});
    grown.attention = Tensor3(2, 3, a.code_tokens.size() + 1);
    for (std::size_t l = 0; l < 2; ++l)
      for (std::size_t s = 0; s < 3; ++s) {
        double lo = 1.0;
        for (std::size_t t = 0; t < a.code_tokens.size(); ++t) {
          grown.attention(l, s, t) = a.attention(l, s, t);
          lo = std::min(lo, a.attention(l, s, t));
        }
        grown.attention(l, s, a.code_tokens.size()) = lo - 0.01;
      }
    const auto before = rank_observations(a);
    const auto after = rank_observations(grown);
    REQUIRE(before.size() == after.size());
    for (std::size_t i = 0; i < before.size(); ++i) CHECK(after[i].rank_1based >= before[i].rank_1based);
  }
}

TEST_CASE("ranks agree with a full sort on small samples") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_sample(rng, 1 + rng() % 12, 1 + rng() % 3, 1 + rng() % 4, "o");
    std::vector<std::string> keys;
    for (const auto& t : a.code_tokens) keys.push_back(match_key(t.text));
    std::vector<RankObservation> expected;
    for (std::size_t l = 0; l < a.num_layers(); ++l) {
      for (std::size_t s = 0; s < a.num_steps(); ++s) {
        const auto r = sorted_rank(a.attention.row(l, s), keys, match_key(a.output_steps[s]));
        if (!r) continue;
        const auto n = a.code_tokens.size();
        CHECK(100.0 * static_cast<double>(*r - 1) / static_cast<double>(n) >= 0.0);
        expected.push_back({a.record_id, l, s, 0, *r, 100.0 * static_cast<double>(*r - 1) / static_cast<double>(n), n});
      }
    }
    auto got = rank_observations(a);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].layer == expected[i].layer);
      CHECK(got[i].step == expected[i].step);
      CHECK(got[i].rank_1based == expected[i].rank_1based);
      CHECK(got[i].normalized_rank == expected[i].normalized_rank);
      CHECK(keys[got[i].matched_token_index] == match_key(a.output_steps[got[i].step]));
      CHECK(rank_of(a.attention.row(got[i].layer, got[i].step), got[i].matched_token_index) == got[i].rank_1based);
    }
    CHECK(got == reference::rank_observations(a));
  }
}

TEST_CASE("observation-weighted and sample-weighted means") {
  auto one = testing::aligned_from_row({0.1, 0.4, 0.3, 0.2}, {"p", "q", "r", "s"}, "r");  // 25
  auto two = testing::aligned_from_row({0.9, 0.1}, {"u", "v"}, "u");                       // 0
  two.output_steps = {"u", "v", "u"};
  two.attention = Tensor3(1, 3, 2);
  two.attention(0, 0, 0) = 0.9;
  two.attention(0, 1, 0) = 0.9;  // v ranks 2 of 2 -> 50
  two.attention(0, 2, 0) = 0.9;
  two.orphan_mass.assign(3, 0.0);
  const auto obs_weighted = rank_report({one, two}, 1, false);
  CHECK(*obs_weighted.layers[0].mean_normalized_rank == doctest::Approx((25.0 + 0.0 + 50.0 + 0.0) / 4));
  CHECK(*obs_weighted.layers[0].topk_hit_rate == doctest::Approx(0.5));
  CHECK(obs_weighted.layers[0].n_observations == 4);
  const auto sample_weighted = rank_report({one, two}, 1, true);
  CHECK(*sample_weighted.layers[0].mean_normalized_rank == doctest::Approx((25.0 + 50.0 / 3) / 2));
  CHECK(*sample_weighted.layers[0].topk_hit_rate == doctest::Approx((0.0 + 2.0 / 3) / 2));
}

TEST_CASE("fixture corpus report matches the brute-force oracle values") {
  const auto corpus = read_dump_file(testing::source_path("tests/fixtures/mini_cr.jsonl"));
  const auto aligned = align_corpus(corpus, Language::Java);
  const auto report = rank_report(aligned, 3);
  std::ostringstream csv;
  write_rank_csv(report, csv);
  CHECK(csv.str() == testing::read_file(testing::source_path("tests/golden/mini_cr/rank.csv")));

  const auto serial = reference::rank_report(aligned, 3);
  REQUIRE(serial.layers.size() == report.layers.size());
  for (std::size_t l = 0; l < report.layers.size(); ++l) {
    CHECK(*serial.layers[l].mean_normalized_rank == doctest::Approx(*report.layers[l].mean_normalized_rank).epsilon(1e-12));
    CHECK(*serial.layers[l].topk_hit_rate == *report.layers[l].topk_hit_rate);
    CHECK(serial.layers[l].n_observations == report.layers[l].n_observations);
  }
  CHECK(serial.repeated_token_ratio == report.repeated_token_ratio);
}

TEST_CASE("layer selection") {
  const auto corpus = read_dump_file(testing::source_path("tests/fixtures/mini_cr.jsonl"));
  const auto report = rank_report(align_corpus(corpus, Language::Java));
  const auto picked = select_layers(report, {2, 0});
  REQUIRE(picked.layers.size() == 2);
  CHECK(picked.layers[0].layer == 2);
  CHECK(picked.layers[1].layer == 0);
  CHECK_THROWS_AS(select_layers(report, {3}), Error);
}
