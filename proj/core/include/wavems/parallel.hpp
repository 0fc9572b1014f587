#pragma once

#include <cstddef>
#include <functional>

namespace wavems {

// Upper bound on worker threads used inside kernels. 1 means fully serial.
void set_num_threads(int n);
int num_threads();

// Splits [0, n) into contiguous chunks and runs fn(begin, end) on each.
// Every index is visited by exactly one worker, so kernels that write disjoint
// outputs per index stay bit-identical regardless of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t min_chunk = 1);

}  // namespace wavems
