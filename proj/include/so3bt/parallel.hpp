#pragma once

// Minimal fork-join helper. Work items are independent and write to their own
// slots, so results never depend on the thread count.

#include <cstddef>
#include <functional>

namespace so3bt {

// min(hardware concurrency, TOEPLITZ_THREADS if set and positive); at least 1.
int thread_budget();

// Runs fn(i) for i in [0, count) on up to thread_budget() threads. The first
// exception thrown by any item is rethrown after all threads join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace so3bt
