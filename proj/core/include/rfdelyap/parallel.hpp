#pragma once

#include <cstddef>
#include <functional>

namespace rfdelyap {

/// Worker cap: RFDE_LYAP_THREADS when set to a positive integer, else the
/// hardware concurrency (at least 1).
std::size_t worker_count();

/// Calls body(i) for i in [0, n) on up to worker_count() threads. Each index
/// runs exactly once; the first exception thrown is rethrown after all
/// workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rfdelyap
