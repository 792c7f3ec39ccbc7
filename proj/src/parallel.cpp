#include "plr/parallel.hpp"

#include <omp.h>

#include <Eigen/Core>

namespace plr {

int hardware_threads() { return omp_get_num_procs(); }

void set_thread_count(int n) {
  const int use = n > 0 ? n : hardware_threads();
  omp_set_num_threads(use);
  Eigen::setNbThreads(use);
}

}  // namespace plr
