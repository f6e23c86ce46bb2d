#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace qlsys {

/// Thread count for assembly loops, read once from QLSYS_THREADS (default 1).
std::size_t assembly_threads();

/// Overrides QLSYS_THREADS for the rest of the process; 0 restores it.
void set_assembly_threads(std::size_t threads);

/// Runs fn(begin, end) over [0, count) split into contiguous blocks. Callers
/// write disjoint outputs per index, so results do not depend on the split.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn);

/// Neumaier-compensated sum in index order.
double compensated_sum(std::span<const double> values);

}  // namespace qlsys
