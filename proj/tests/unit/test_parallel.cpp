#include <atomic>
#include <cstdlib>
#include <random>
#include <sstream>

#include "attnlens/parallel.hpp"
#include "attnlens/reference.hpp"
#include "attnlens/report.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace attnlens;

namespace {

struct WorkerGuard {
  int saved = worker_count();
  ~WorkerGuard() { set_worker_count(saved); }
};

Corpus random_corpus(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto base = read_dump_file(testing::source_path("tests/fixtures/mini_cr.jsonl"));
  Corpus out;
  out.task = base.task;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = base.records[i % base.records.size()];
    r.id = "x" + std::to_string(i);
    testing::random_rows(r.attention, rng);
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST_CASE("every index runs once") {
  WorkerGuard guard;
  set_worker_count(4);
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  parallel_for(0, [](std::size_t) { FAIL("not called"); });
}

TEST_CASE("the lowest failing index is rethrown") {
  WorkerGuard guard;
  for (int workers : {1, 2, 8}) {
    set_worker_count(workers);
    try {
      parallel_for(200, [](std::size_t i) {
        if (i % 37 == 5) throw Error(ErrorKind::Parse, "index " + std::to_string(i));
      });
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()) == "index 5");
    }
  }
}

TEST_CASE("worker environment variable") {
  ::setenv("ATTNLENS_WORKERS", "3", 1);
  CHECK(workers_from_env() == 3);
  ::setenv("ATTNLENS_WORKERS", "zero", 1);
  CHECK_FALSE(workers_from_env().has_value());
  ::setenv("ATTNLENS_WORKERS", "0", 1);
  CHECK_FALSE(workers_from_env().has_value());
  ::unsetenv("ATTNLENS_WORKERS");
  CHECK_FALSE(workers_from_env().has_value());
}

TEST_CASE("corpus kernels give identical results for any worker count and match the serial reference") {
  WorkerGuard guard;
  const auto corpus = random_corpus(60, 77);
  set_worker_count(1);
  const auto aligned1 = align_corpus(corpus, Language::Java);
  const auto acc1 = accumulate(aligned1);
  const auto rank1 = rank_report(aligned1, 3);
  const auto metrics1 = corpus_metrics(corpus, Language::Java);
  for (int workers : {2, 5, 16}) {
    CAPTURE(workers);
    set_worker_count(workers);
    const auto aligned = align_corpus(corpus, Language::Java);
    CHECK(aligned == aligned1);
    const auto acc = accumulate(aligned);
    CHECK(acc.raw_mass == acc1.raw_mass);
    CHECK(acc.population == acc1.population);
    CHECK(acc.orphan_mass == acc1.orphan_mass);
    const auto rank = rank_report(aligned, 3);
    for (std::size_t l = 0; l < rank.layers.size(); ++l) {
      CHECK(rank.layers[l].mean_normalized_rank == rank1.layers[l].mean_normalized_rank);
      CHECK(rank.layers[l].topk_hit_rate == rank1.layers[l].topk_hit_rate);
    }
    const auto metrics = corpus_metrics(corpus, Language::Java);
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      CHECK(metrics[i].bleu4_smoothed == metrics1[i].bleu4_smoothed);
      CHECK(metrics[i].difficulty == metrics1[i].difficulty);
    }
  }

  const auto ref_aligned = reference::align_corpus(corpus, Language::Java);
  const auto ref_acc = reference::accumulate(ref_aligned);
  const auto ref_rank = reference::rank_report(ref_aligned, 3);
  CHECK(ref_acc.population == acc1.population);
  for (std::size_t l = 0; l < acc1.raw_mass.size(); ++l) {
    for (std::size_t c = 0; c < kNumCategories; ++c)
      CHECK(ref_acc.raw_mass[l][c] == doctest::Approx(acc1.raw_mass[l][c]).epsilon(1e-12));
    CHECK(ref_rank.layers[l].n_observations == rank1.layers[l].n_observations);
    CHECK(*ref_rank.layers[l].mean_normalized_rank == doctest::Approx(*rank1.layers[l].mean_normalized_rank).epsilon(1e-12));
    CHECK(*ref_rank.layers[l].topk_hit_rate == doctest::Approx(*rank1.layers[l].topk_hit_rate).epsilon(1e-12));
  }
}

TEST_CASE("a parse failure names the same record for any worker count") {
  WorkerGuard guard;
  auto corpus = random_corpus(30, 5);
  corpus.records[7].source_text = "int broken( {";
  corpus.records[21].source_text = "int alsoBroken( {";
  std::string first;
  for (int workers : {1, 4, 12}) {
    set_worker_count(workers);
    try {
      align_corpus(corpus, Language::Java);
      FAIL("expected a parse error");
    } catch (const Error& e) {
      if (first.empty()) first = e.what();
      CHECK(std::string(e.what()) == first);
    }
  }
}
