#pragma once

#include <cstddef>
#include <functional>

namespace bevkit {

/// Worker count: BEVKIT_THREADS when set to a positive integer, otherwise the
/// hardware concurrency (at least 1).
int worker_count();

/// Calls fn(i) for i in [0, n) on up to worker_count() threads. Iterations
/// must be independent. The first exception thrown by any iteration is
/// rethrown after all workers stop.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace bevkit
