#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <vector>

namespace attnlens {

// Number of OpenMP workers used by the corpus-level kernels.
int worker_count();
void set_worker_count(int workers);

// Reads ATTNLENS_WORKERS; returns nullopt when unset or not a positive integer.
std::optional<int> workers_from_env();

// Runs fn(i) for i in [0, n) on the OpenMP team. Exceptions are captured per
// index and the one with the lowest index is rethrown after the loop, so the
// reported failure does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::vector<std::exception_ptr> failures(n);
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
}

}  // namespace attnlens
