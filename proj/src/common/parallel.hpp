#pragma once

#include <cstddef>
#include <functional>

namespace eclab {

// Process-wide worker count for intra-stage loops. 0 selects hardware concurrency.
void set_thread_count(unsigned n) noexcept;
unsigned thread_count() noexcept;

// Runs body(i) for i in [0, n) over contiguous chunks. Each index is handled by
// exactly one worker, so any per-index reduction keeps its sequential order and
// the result does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace eclab
