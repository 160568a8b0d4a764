#pragma once

#include <cstddef>
#include <functional>

namespace dsii {

// Worker count: explicit request wins, else DSII_THREADS, else hardware; clamped to [1, 64].
int resolve_threads(int requested = -1);

// Runs body(i) for i in [0, count) on a shared-counter worker pool. Determinism is the
// caller's job: store per-index outputs and reduce sequentially afterwards. The first
// exception wins and is rethrown after the pool drains.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace dsii
