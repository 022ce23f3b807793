#include "attnlens/parallel.hpp"

#include <cstdlib>
#include <string>

#include <omp.h>

namespace attnlens {

int worker_count() { return omp_get_max_threads(); }

void set_worker_count(int workers) {
  if (workers > 0) omp_set_num_threads(workers);
}

std::optional<int> workers_from_env() {
  const char* raw = std::getenv("ATTNLENS_WORKERS");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const int value = std::stoi(raw, &used);
    if (used != std::string(raw).size() || value <= 0) return std::nullopt;
    return value;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace attnlens
