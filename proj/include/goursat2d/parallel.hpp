#pragma once

#include <cstddef>
#include <functional>

namespace goursat2d {

/// Upper bound on worker threads. Read once from GOURSAT2D_THREADS
/// (positive integer); defaults to the hardware concurrency.
std::size_t max_threads();

/// Overrides the thread cap for the rest of the process (0 restores the default).
void set_max_threads(std::size_t count);

/// Runs body(k) for k in [0, count). Work is split into contiguous chunks;
/// each index is processed exactly once, so results written per index are
/// independent of the schedule.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace goursat2d
