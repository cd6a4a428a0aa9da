#ifndef SIMPLEX_EVAL_PARALLEL_HPP
#define SIMPLEX_EVAL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace simplex_eval {

// Worker count: min(hardware_concurrency, SIMPLEX_EVAL_THREADS) when the
// environment variable is set to a positive integer, else hardware
// concurrency; never less than 1.
std::size_t worker_count();

// Runs fn(i) for i in [0, n) on up to worker_count() threads with static
// partitioning.  Results must not depend on the partition: callers give
// each index its own derived rng stream and disjoint output slots, so a
// run is reproducible for any thread count.  Exceptions from workers are
// captured and the first one is rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Same with an explicit worker count (>= 1); the single-argument form uses
// worker_count().
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn);

}  // namespace simplex_eval

#endif
