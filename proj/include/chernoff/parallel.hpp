#pragma once

#include <cstddef>
#include <functional>

namespace chernoff {

/// Worker count used by row-parallel loops (default 1). Results never depend on
/// it: each index is computed independently and reductions run in index order.
void set_thread_count(int threads);
int thread_count() noexcept;

/// Calls body(begin, end) on disjoint contiguous chunks covering [0, count).
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace chernoff
