#pragma once

#include <cstddef>
#include <functional>

namespace hbtrack {

/// Worker count taken from the HBTRACK_WORKERS environment variable, falling
/// back to the hardware concurrency. Always at least 1.
std::size_t worker_count();

/// Runs fn(i) for i in [0, n) on a pool of worker_count() threads. Exceptions
/// from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hbtrack
