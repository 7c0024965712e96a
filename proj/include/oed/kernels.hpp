#pragma once

#include <cstddef>

namespace oed::kernels {

// Data-parallel inner loops shared by the inverse/criteria/postproc hot
// paths. Each kernel has a scalar reference implementation and an AVX2
// variant; the active table is chosen once at startup from CPU features
// (override with OED_KERNELS=scalar).
//
// All kernels are plain reductions / elementwise ops over contiguous
// double arrays; results may differ from the scalar reference only by
// summation order (tested to tight relative tolerance).
struct Ops {
  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i u[i]*a[i]*b[i]  (weighted Gram entry, u = survival .* weights)
  double (*dot3)(const double* u, const double* a, const double* b,
                 std::size_t n);
  // out[i] += c*a[i]*b[i]  (quadratic-form accumulation for gradients)
  void (*had_fma)(double c, const double* a, const double* b, double* out,
                  std::size_t n);
  // sum_i w[i]*(1-w[i])
  double (*double_well)(const double* w, std::size_t n);
  // sum_i u[i]*r[i]*r[i]  (weighted residual sum of squares)
  double (*wrss)(const double* u, const double* r, std::size_t n);
  // count of |x[i]| > thr
  std::size_t (*count_exceed)(const double* x, double thr, std::size_t n);

  const char* name;
};

const Ops& scalar_ops();
const Ops& avx2_ops();  // valid only if avx2_available()
bool avx2_available();

// Runtime-selected table.
const Ops& active();

// Test hook: force the scalar table (true) or re-run auto-detection (false).
void force_scalar(bool on);

}  // namespace oed::kernels
