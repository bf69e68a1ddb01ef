#pragma once

#include <cstddef>
#include <functional>

namespace grasswalk {

/// Thread cap from GRASSWALK_THREADS, or 1 when unset/invalid.
int default_thread_count();

/// Runs body(i) for i in [0, n) on up to `threads` workers. Callers write
/// results into per-index slots so the outcome never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace grasswalk
