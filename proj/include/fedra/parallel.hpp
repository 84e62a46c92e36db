#pragma once

#include <cstddef>
#include <functional>

namespace fedra {

// Worker cap: FEDRA_SIM_THREADS if set and positive, else the hardware
// concurrency (at least 1).
unsigned worker_threads();

// Runs fn(i) for i in [0, count). Each index runs exactly once; callers
// write results into per-index slots so the outcome is order-independent.
// The first exception thrown by any fn is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace fedra
