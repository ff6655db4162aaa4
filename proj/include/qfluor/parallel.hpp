// parallel.hpp: parallel index loop; QFLUOR_THREADS overrides the worker count

#pragma once

#include <functional>

namespace qfluor {

// Worker count: QFLUOR_THREADS if set and positive, otherwise hardware concurrency.
int thread_count();

// Calls body(i) for i in [0, n). Each index runs exactly once; results written by index are
// independent of scheduling. The first exception thrown by any worker is rethrown.
void parallel_for(long n, const std::function<void(long)>& body, int threads = 0);

} // namespace qfluor
