#pragma once

#include <cstddef>
#include <functional>

namespace chebyrl {

/// Worker count for `requested` (<= 0 means all logical cores, at least 1).
int resolve_jobs(int requested);

/// Calls fn(i) for i in [0, n) on up to `jobs` threads. Indices are handed out
/// dynamically, so callers must write results by index. The first exception
/// thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace chebyrl
