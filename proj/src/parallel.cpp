#include "evp/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evp {

int worker_count() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_worker_count(int workers) noexcept {
#ifdef _OPENMP
  if (workers <= 0) workers = omp_get_num_procs();
  omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

void configure_workers_from_env() {
  const char* value = std::getenv("EVP_THREADS");
  if (value == nullptr || *value == '\0') return;
  try {
    set_worker_count(std::stoi(value));
  } catch (const std::exception&) {
    set_worker_count(0);
  }
}

}  // namespace evp
