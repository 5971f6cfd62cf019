#include "aquafuse/parallel.hpp"

namespace aquafuse {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

ThreadLimit::ThreadLimit(int threads) {
#ifdef _OPENMP
  previous_ = omp_get_max_threads();
  omp_set_num_threads(threads < 1 ? 1 : threads);
#else
  (void)threads;
#endif
}

ThreadLimit::~ThreadLimit() {
#ifdef _OPENMP
  omp_set_num_threads(previous_);
#endif
}

}  // namespace aquafuse
