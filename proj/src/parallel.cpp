#include "oed/parallel.hpp"

#include <algorithm>
#include <atomic>

namespace oed {
namespace {
std::atomic<int> g_max_threads{1};
}

void set_max_threads(int n) { g_max_threads.store(std::max(1, n)); }
int max_threads() { return g_max_threads.load(); }

}  // namespace oed
