#pragma once

#include <functional>

namespace permurank {

/// Runs f(i) for i in [0, n) on up to `workers` threads. Callers store
/// results by index and reduce sequentially afterwards, so outcomes do not
/// depend on the worker count or scheduling. workers <= 1 runs inline.
void parallel_for(int n, int workers, const std::function<void(int)>& f);

int hardware_workers();

}  // namespace permurank
