#pragma once

#include <cstddef>
#include <functional>

namespace obcsaa {

// Worker threads used by parallel_blocks. 0 restores the hardware default.
void set_thread_count(int n);
int thread_count();

// Runs fn(block_index, begin, end) over [0, count) split into fixed-size
// blocks. Block boundaries depend only on (count, block_size), never on the
// thread count, so callers that combine per-block partial results in block
// order get bitwise-identical output for any thread setting.
void parallel_blocks(
    std::size_t count, std::size_t block_size,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace obcsaa
