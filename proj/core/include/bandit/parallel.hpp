#pragma once

#include <cstddef>
#include <functional>

namespace bandit {

/// Worker-thread cap: BANDIT_FORGE_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
std::size_t worker_threads();

/// Calls fn(0..count-1). With parallel set, indices are spread over up to
/// worker_threads() threads; the first exception thrown is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, bool parallel);

}  // namespace bandit
