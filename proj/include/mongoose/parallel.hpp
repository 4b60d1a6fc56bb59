#pragma once

#include <functional>

namespace mongoose {

// Runs fn(0..n-1) across up to `workers` threads. Each index must write only
// its own slots; with workers <= 1 the loop runs inline on the caller.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

}  // namespace mongoose
