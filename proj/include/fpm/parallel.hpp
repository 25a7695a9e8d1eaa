#pragma once

#include <cstddef>
#include <functional>

namespace fpm {

/// Number of worker threads used by data-parallel loops. Resolved once per
/// process: FPM_THREADS if set (minimum 1), otherwise the hardware
/// concurrency.
unsigned thread_budget();

/// Runs fn(k) for every k in [0, count), possibly on multiple threads.
/// Callers must write results to per-k slots; any cross-k reduction has to
/// happen afterwards in a fixed order so results stay bitwise reproducible.
void for_each_index(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace fpm
