#pragma once

#include <cstddef>
#include <functional>

namespace hpss {

/// Worker count: HPSS_THREADS if set and positive, else hardware concurrency.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Work is split into contiguous chunks, one per
/// worker, so chunk c always handles the same indices for a given worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t worker, std::size_t i)>& body);

}  // namespace hpss
