#pragma once

#include <cstddef>
#include <functional>

namespace embsizer::analysis {

// Runs fn(0) .. fn(n-1) on up to `workers` threads (0 = hardware
// concurrency). Each index runs exactly once; if any call throws, the
// exception of the lowest failing index is rethrown after all threads join.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

std::size_t default_workers();

}  // namespace embsizer::analysis
