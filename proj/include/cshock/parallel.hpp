#pragma once

#include <cstddef>
#include <functional>

namespace cshock {

// Worker count used by every parallel loop in the library. 0 means
// std::thread::hardware_concurrency().
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n) using contiguous static chunks. Bodies must only
// write to slots owned by i; any reduction is done by the caller afterwards in
// index order, which keeps results independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace cshock
