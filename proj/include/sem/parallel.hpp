#pragma once

#include <cstdint>
#include <functional>

namespace sem {

// Global cap on worker threads (CLI --threads).  Default: hardware cores.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n).  Each index must write only to its own output
// slots; reductions happen afterwards in fixed index order, so results are
// independent of the thread count.  If any index throws, all indices still
// run and the exception with the smallest index is rethrown.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn);

}  // namespace sem
