#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace fbmlab {

/// Worker count: `requested` when > 0, else FBMLAB_THREADS, else hardware concurrency.
unsigned resolve_threads(int requested = 0);

/// Calls body(i) for i in [0, count) on up to `threads` workers. Work items
/// write results into caller-owned slots indexed by i, so the outcome does
/// not depend on scheduling. The first exception thrown by body is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

/// Fixed-shape pairwise summation tree over the values in index order.
double pairwise_sum(std::span<const double> values);

}  // namespace fbmlab
