#pragma once

#include <cstddef>
#include <functional>

namespace volind {

/// Runs fn(0) ... fn(count-1) on up to `workers` threads. Results must be written to
/// per-index slots by the caller. If any call throws, the exception of the lowest
/// failing index is rethrown after all threads finish.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace volind
