#pragma once

#include <cstddef>
#include <functional>

namespace sojourn {

/// Caps the worker pool (0 restores hardware concurrency).
void set_max_threads(unsigned n);
unsigned max_threads();

/// Runs fn(block_index, begin, end) over [0, n_items) split into n_blocks
/// contiguous blocks, distributed across workers. Block boundaries depend
/// only on (n_items, n_blocks), so per-block results combined in block order
/// are independent of the pool size. Worker exceptions are rethrown.
void parallel_blocks(std::size_t n_items, std::size_t n_blocks,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace sojourn
