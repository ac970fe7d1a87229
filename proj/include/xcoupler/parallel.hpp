#pragma once

#include <cstddef>
#include <functional>

namespace xcoupler {

// Worker count: hardware concurrency capped by XCOUPLER_THREADS when set.
unsigned worker_count();

// Calls body(i) for i in [0, n) over at most worker_count() threads, each
// taking a contiguous chunk. Exceptions from the lowest-indexed failing
// chunk are rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body,
                  std::size_t min_chunk = 64);

}  // namespace xcoupler
