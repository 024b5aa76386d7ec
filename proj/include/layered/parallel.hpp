#pragma once

#include <cstddef>
#include <functional>

namespace layered {

// threads <= 0 picks hardware concurrency.
int resolve_threads(int threads);

// Runs fn(i) for i in [0, n) on a fixed pool of workers.  fn must write only
// to slot i of its output so that results do not depend on scheduling.  The
// first exception thrown by any worker is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace layered
