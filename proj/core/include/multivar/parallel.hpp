#pragma once

#include <cstddef>
#include <functional>

namespace multivar {

/// Hardware concurrency, at least 1.
int default_workers() noexcept;

/// Runs fn(i) for every i in [0, n) on up to `workers` threads (the caller's
/// thread included). Tasks are claimed in index order; after all finish, the
/// exception of the lowest failing index is rethrown.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace multivar
