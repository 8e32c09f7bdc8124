#include "regor/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace regor {

int configure_threads_from_env() {
  if (const char* env = std::getenv("REGOR_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) set_max_threads(n);
    } catch (const std::exception&) {
      // Malformed values leave the runtime default untouched.
    }
  }
  return max_threads();
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_max_threads(int threads) {
#ifdef _OPENMP
  omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

}  // namespace regor
