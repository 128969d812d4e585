#pragma once

#include <cstddef>
#include <functional>

namespace chemostab {

/// Runs task(k) for k in [0, count) on up to `threads` workers. The first
/// failure in index order is rethrown after all tasks finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

}  // namespace chemostab
