#pragma once

#include <cstddef>
#include <functional>

namespace tpflow {

/// Worker count used by parallel_for; defaults to the hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Run fn(i) for i in [begin, end) over contiguous chunks on the worker pool.
/// fn must only write to locations owned by index i; reductions stay serial.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& fn);

}  // namespace tpflow
