#pragma once

#include <cstddef>
#include <functional>

namespace torusendo {

/// Worker count: TORUSENDO_THREADS if set and positive, otherwise hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n) over contiguous chunks on worker threads. Bodies must only
/// write to their own output slots; callers reduce in index order afterwards.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace torusendo
