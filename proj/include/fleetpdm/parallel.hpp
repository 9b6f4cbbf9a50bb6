// Tiny fork-join helper. Work items must not depend on execution order;
// callers merge results by index so output is identical for any worker
// count. FLEETPDM_THREADS caps the pool.
#pragma once

#include <cstddef>
#include <functional>

namespace fleetpdm {

// Worker cap: FLEETPDM_THREADS when set (>= 1), else hardware concurrency
// clamped to 8.
int worker_count();

// Runs fn(i) for i in [0, n) across up to `workers` threads (sequential
// when workers <= 1 or n < 2). fn must be safe to call concurrently for
// distinct i. Exceptions propagate to the caller.
void parallel_for_index(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace fleetpdm
