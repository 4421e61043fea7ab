#pragma once

#include <cstddef>
#include <functional>

namespace spinres
{
/// Worker count: hardware concurrency, capped by SPINRES_THREADS when set.
unsigned worker_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; callers
/// write into pre-sized slots so results do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)> &body);
} // namespace spinres
