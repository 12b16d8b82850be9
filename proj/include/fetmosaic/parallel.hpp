#pragma once

#include <cstddef>
#include <functional>

namespace fetmosaic {

// Worker count: FETMOSAIC_THREADS when set and > 0, otherwise hardware
// concurrency. A value of 0 in the environment also means auto.
size_t thread_budget();

// Runs fn(i) for i in [0, n), spreading indices over the thread budget.
// Exceptions from workers are rethrown (first one wins).
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

} // namespace fetmosaic
