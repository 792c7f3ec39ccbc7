#pragma once

namespace plr {

/// Caps OpenMP worker threads, which also drive the Eigen products. n <= 0 restores all cores.
void set_thread_count(int n);
int hardware_threads();

}  // namespace plr
