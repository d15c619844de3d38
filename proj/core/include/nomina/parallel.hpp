#pragma once

#include <cstddef>
#include <functional>

namespace nomina {

/// Worker thread cap: NOMINA_THREADS if set (clamped to [1, hardware]),
/// otherwise the hardware concurrency. Read once per process.
std::size_t thread_count();

/// Runs fn(begin, end) over a partition of [0, n) across worker threads.
/// Chunks are contiguous and disjoint, so callers that write only to their
/// own index range get deterministic results regardless of the thread count.
/// Runs inline when n < min_per_thread or only one worker is available.
void parallel_for(std::size_t n, std::size_t min_per_thread,
                  const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace nomina
