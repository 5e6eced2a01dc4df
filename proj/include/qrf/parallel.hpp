#pragma once

#include <cstddef>
#include <functional>

namespace qrf {

// Process-wide worker count for slice loops. 0 or 1 means serial.
void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, count). Each index is visited exactly once;
// bodies must not write to shared state.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace qrf
