#include "oed/kernels.hpp"

#include <cmath>

namespace oed::kernels {
namespace {

double dot_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double dot3_s(const double* u, const double* a, const double* b,
              std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += u[i] * a[i] * b[i];
  return acc;
}

void had_fma_s(double c, const double* a, const double* b, double* out,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += c * a[i] * b[i];
}

double double_well_s(const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += w[i] * (1.0 - w[i]);
  return acc;
}

double wrss_s(const double* u, const double* r, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += u[i] * r[i] * r[i];
  return acc;
}

std::size_t count_exceed_s(const double* x, double thr, std::size_t n) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (std::abs(x[i]) > thr) ++c;
  return c;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{dot_s,  dot3_s, had_fma_s,
                       double_well_s, wrss_s, count_exceed_s, "scalar"};
  return ops;
}

}  // namespace oed::kernels
