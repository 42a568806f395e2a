#ifndef VOCALSCREEN_PARALLEL_HPP_
#define VOCALSCREEN_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace vocalscreen {

// Runs body(i) for i in [0, n) on up to `jobs` threads. Indices are claimed
// dynamically, so callers must write results into per-index slots for
// output to stay independent of the worker count. The first exception
// thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& body);

// Worker count from VOCALSCREEN_JOBS, or 1 when unset or invalid.
std::size_t default_jobs();

}  // namespace vocalscreen

#endif  // VOCALSCREEN_PARALLEL_HPP_
