#include "ostrovsky/execution.hpp"

#include <omp.h>

namespace ostrovsky {

void set_thread_count(int n) {
  static const int default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : default_threads);
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace ostrovsky
