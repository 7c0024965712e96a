#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace oed {

// Worker cap for scenario-parallel loops (set from the CLI --threads flag).
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n) across up to max_threads() workers. Results
// must be written to per-index storage; the first exception (by smallest
// index) is rethrown, so behavior matches the sequential loop regardless of
// thread count.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(max_threads(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (int i = 0; i < n; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);
}

}  // namespace oed
