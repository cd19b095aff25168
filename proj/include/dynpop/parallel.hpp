#ifndef DYNPOP_PARALLEL_HPP
#define DYNPOP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace dynpop {

/// Worker count: DYNPOP_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (at least 1).
int thread_count();

/// Calls fn(i) for i in [0, n) across up to thread_count() threads. The
/// first exception thrown by any call is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace dynpop

#endif  // DYNPOP_PARALLEL_HPP
