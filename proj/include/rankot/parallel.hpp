#pragma once

#include <cstdint>
#include <functional>

namespace rankot {

// Worker cap: RANKOT_THREADS if set, otherwise the number of logical CPUs.
int worker_count();

// Static-partition parallel loop over [0, n). The body must write only to
// per-index slots; iteration order is unspecified.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

} // namespace rankot
