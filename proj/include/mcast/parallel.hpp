#pragma once

#include <cstddef>
#include <functional>

namespace mcast {

/// Runs fn(0) .. fn(n - 1) on up to `workers` threads. Each index is handled
/// exactly once; callers write into per-index slots so results do not depend
/// on scheduling. The first exception thrown by fn is rethrown after all
/// workers have joined.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// std::thread::hardware_concurrency(), at least 1.
std::size_t default_workers();

}  // namespace mcast
