#pragma once

#include <cstddef>
#include <functional>

namespace knnmi {

/// Caps worker threads used by parallel_for; 0 restores the hardware default.
void set_max_threads(unsigned threads);
unsigned max_threads();

/// Splits [0, n) into contiguous chunks and runs body(begin, end) on each.
/// Nested calls from inside a worker run serially on the calling thread.
/// Every index is written by exactly one chunk, so results that are stored
/// per index and reduced afterwards do not depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace knnmi
