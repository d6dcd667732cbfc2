#pragma once

#include <cstddef>
#include <functional>

namespace dichotomy {

/// Worker count from DICHOTOMY_THREADS (0 or unset means hardware concurrency).
unsigned thread_count();

/// Runs body(i) for i in [0, count). Results must be written to per-index slots;
/// the exception of the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace dichotomy
