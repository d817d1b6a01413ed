#include "expdamp/parallel.hpp"

#include <atomic>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace expdamp {

namespace {
std::atomic<int> g_threads{1};
}

void set_num_threads(int threads) {
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  g_threads.store(threads);
#ifdef _OPENMP
  omp_set_num_threads(threads);
#endif
}

int num_threads() noexcept { return g_threads.load(); }

}  // namespace expdamp
