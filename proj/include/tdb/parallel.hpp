#pragma once

#include <cstddef>
#include <functional>

namespace tdb {

// Thread cap resolution order: set_max_threads() > TDB_SPARSE_THREADS env > 1.
int max_threads();
void set_max_threads(int n);

// Static range split over [0, count). Each index is processed by exactly one
// worker and per-index arithmetic is sequential, so results are bit-identical
// for every thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t begin, std::size_t end)>& body);

}  // namespace tdb
