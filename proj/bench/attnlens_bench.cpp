// Times the serial reference kernels against the OpenMP ones on a synthetic
// corpus built by replicating the fixture records with fresh attention.

#include <chrono>
#include <cstdio>
#include <random>

#include "CLI11.hpp"
#include "attnlens/parallel.hpp"
#include "attnlens/reference.hpp"

using namespace attnlens;

namespace {

template <typename Fn>
double best_of(int repeats, Fn&& fn) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    best = std::min(best, std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count());
  }
  return best;
}

Corpus synthetic_corpus(const Corpus& base, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Corpus out;
  out.task = base.task;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = base.records[i % base.records.size()];
    r.id = "b" + std::to_string(i);
    for (std::size_t l = 0; l < r.attention.layers(); ++l) {
      for (std::size_t s = 0; s < r.attention.steps(); ++s) {
        auto row = r.attention.row(l, s);
        double sum = 0.0;
        for (auto& v : row) sum += (v = u(rng));
        for (auto& v : row) v /= sum;
      }
    }
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"attnlens kernel benchmark"};
  std::string dump = "tests/fixtures/mini_cr.jsonl";
  std::size_t records = 2000;
  int repeats = 3;
  int workers = 0;
  app.add_option("--dump", dump, "Seed corpus (.jsonl)");
  app.add_option("--records", records, "Synthetic corpus size")->check(CLI::PositiveNumber);
  app.add_option("--repeats", repeats, "Runs per kernel; the best is reported")->check(CLI::PositiveNumber);
  app.add_option("--workers", workers, "OpenMP workers (default: all cores)");
  CLI11_PARSE(app, argc, argv);

  try {
    if (workers > 0) set_worker_count(workers);
    const auto corpus = synthetic_corpus(read_dump_file(dump), records, 1);
    const auto aligned = align_corpus(corpus, Language::Java);

    std::printf("records=%zu workers=%d\n", records, worker_count());
    std::printf("%-16s %12s %12s %8s\n", "kernel", "serial_ms", "parallel_ms", "speedup");
    auto row = [&](const char* name, double serial, double parallel) {
      std::printf("%-16s %12.2f %12.2f %8.2f\n", name, serial, parallel, serial / parallel);
    };
    row("align", best_of(repeats, [&] { reference::align_corpus(corpus, Language::Java); }),
        best_of(repeats, [&] { align_corpus(corpus, Language::Java); }));
    row("rank", best_of(repeats, [&] { reference::rank_report(aligned, 3); }),
        best_of(repeats, [&] { rank_report(aligned, 3); }));
    row("accumulate", best_of(repeats, [&] { reference::accumulate(aligned); }),
        best_of(repeats, [&] { accumulate(aligned); }));
    row("metrics", best_of(repeats, [&] { reference::corpus_metrics(corpus, Language::Java); }),
        best_of(repeats, [&] { corpus_metrics(corpus, Language::Java); }));
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  }
  return 0;
}
