#pragma once

#include <cstddef>
#include <functional>

namespace carleman {

// Worker cap for data-parallel loops (0 = hardware concurrency).
void set_thread_budget(int threads);
int thread_budget();

// Runs fn(i) for i in [0, n). Tasks must write only to their own slots;
// results are then reduced serially by the caller in index order, which keeps
// every report deterministic regardless of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace carleman
