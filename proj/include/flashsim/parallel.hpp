#pragma once

#include <cstddef>
#include <functional>
#include <optional>

namespace flashsim {

/// Thread count from an explicit request, else FLASHSIM_THREADS, else the
/// hardware concurrency.
unsigned resolve_threads(std::optional<unsigned> requested = std::nullopt);

/// Runs body(i) for i in [0, n) on `threads` workers with static chunking.
/// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace flashsim
