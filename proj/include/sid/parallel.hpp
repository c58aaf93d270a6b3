#pragma once

#include <cstddef>
#include <functional>

namespace sid {

/// Worker count: SID_THREADS if set and positive, else the hardware
/// concurrency (at least 1).
std::size_t worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Each index
/// is processed exactly once; callers write results into slot i so output
/// order never depends on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sid
