#pragma once

#include <cstddef>
#include <functional>

namespace sard {

/// Worker count: SARD_THREADS if set and positive, otherwise hardware concurrency.
std::size_t worker_count();

/// Runs fn(begin, end) over contiguous chunks of [0, n) on up to worker_count() threads.
/// Chunks never overlap, so callers writing disjoint output ranges stay deterministic.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace sard
