#include "oed/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace oed::kernels {
namespace {

std::atomic<const Ops*> g_active{nullptr};

const Ops* detect() {
  const char* env = std::getenv("OED_KERNELS");
  if (env && std::strcmp(env, "scalar") == 0) return &scalar_ops();
  if (avx2_available()) return &avx2_ops();
  return &scalar_ops();
}

}  // namespace

const Ops& active() {
  const Ops* ops = g_active.load(std::memory_order_acquire);
  if (!ops) {
    ops = detect();
    g_active.store(ops, std::memory_order_release);
  }
  return *ops;
}

void force_scalar(bool on) {
  g_active.store(on ? &scalar_ops() : detect(), std::memory_order_release);
}

}  // namespace oed::kernels
