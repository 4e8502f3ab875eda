#pragma once

#include <cstddef>
#include <functional>

namespace fbsde {

// Worker count used by parallel_for. Defaults to FBSDE_THREADS if set,
// otherwise the hardware concurrency.
std::size_t thread_count();
void set_thread_count(std::size_t n);

// Runs body(i) for i in [0, n). Each index must write only its own output;
// with that discipline results do not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace fbsde
