#pragma once

#include <functional>

namespace sympatch {

/// Worker count from SYMPATCH_THREADS, else the hardware concurrency (at least 1).
int thread_count();

/// Splits [0, n) into contiguous chunks, one per worker, and runs `fn(begin, end, worker)`.
/// The first exception thrown by any worker is rethrown after all workers finish.
void parallel_chunks(int n, const std::function<void(int, int, int)>& fn);

}  // namespace sympatch
