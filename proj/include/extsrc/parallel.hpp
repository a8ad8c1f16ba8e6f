// Deterministic fork-join helper: task i writes only to slot i, workers pick
// tasks round-robin, and any reduction happens afterwards in task order.

#pragma once

#include <functional>

namespace extsrc {

void parallel_for(int ntasks, int workers, const std::function<void(int)>& fn);

} // namespace extsrc
