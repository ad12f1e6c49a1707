#pragma once

#include <cstdint>
#include <functional>

namespace wg {

// Resolves the worker count: `requested` if positive, else hardware
// concurrency, in both cases capped by the WEIGHTGUARD_THREADS env var.
int effective_threads(int requested);

// Runs fn(i) for i in [0, n). Work is striped statically so each index is
// processed exactly once regardless of scheduling; callers write results
// into per-index slots, which keeps merged output independent of the
// thread count. Exceptions from workers are rethrown on the caller.
void parallel_for(int64_t n, int threads,
                  const std::function<void(int64_t)>& fn);

} // namespace wg
