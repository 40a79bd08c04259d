#pragma once

#include <functional>

namespace lowmach {

/// Process-wide cap on worker threads (1 = run inline). Default 1.
void set_max_threads(int threads);
int max_threads();

/// Calls body(i) for i in [0, count), split into contiguous chunks across at
/// most max_threads() threads. Results must not depend on the split.
void parallel_for(long count, const std::function<void(long)>& body);

}  // namespace lowmach
