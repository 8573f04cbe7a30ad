#pragma once

#include <cstddef>
#include <functional>

namespace spdemono {

/// Worker count from SPDE_MONO_THREADS (0 or unset = hardware concurrency).
int worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; the exception from the lowest failing index is
/// rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace spdemono
