#include "oed/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define OED_X86 1
#include <immintrin.h>
#else
#define OED_X86 0
#endif

#include <cmath>

namespace oed::kernels {

#if OED_X86

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_v(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double dot3_v(const double* u, const double* a, const double* b,
              std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d p0 = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d p1 = _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                               _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(u + i), p0, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(u + i + 4), p1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(u + i), p, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += u[i] * a[i] * b[i];
  return acc;
}

void had_fma_v(double c, const double* a, const double* b, double* out,
               std::size_t n) {
  const __m256d cv = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d p = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d o = _mm256_loadu_pd(out + i);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(cv, p, o));
  }
  for (; i < n; ++i) out[i] += c * a[i] * b[i];
}

double double_well_v(const double* w, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  __m256d acc0 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d wv = _mm256_loadu_pd(w + i);
    acc0 = _mm256_fmadd_pd(wv, _mm256_sub_pd(one, wv), acc0);
  }
  double acc = hsum(acc0);
  for (; i < n; ++i) acc += w[i] * (1.0 - w[i]);
  return acc;
}

double wrss_v(const double* u, const double* r, std::size_t n) {
  return dot3_v(u, r, r, n);
}

std::size_t count_exceed_v(const double* x, double thr, std::size_t n) {
  const __m256d tv = _mm256_set1_pd(thr);
  const __m256d signmask = _mm256_set1_pd(-0.0);
  std::size_t c = 0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d ax = _mm256_andnot_pd(signmask, _mm256_loadu_pd(x + i));
    __m256d gt = _mm256_cmp_pd(ax, tv, _CMP_GT_OQ);
    c += static_cast<std::size_t>(__builtin_popcount(
        static_cast<unsigned>(_mm256_movemask_pd(gt))));
  }
  for (; i < n; ++i)
    if (std::abs(x[i]) > thr) ++c;
  return c;
}

}  // namespace

bool avx2_available() { return __builtin_cpu_supports("avx2") != 0; }

const Ops& avx2_ops() {
  static const Ops ops{dot_v, dot3_v,  had_fma_v,
                       double_well_v, wrss_v, count_exceed_v, "avx2"};
  return ops;
}

#else  // non-x86: no vector variant, the dispatcher falls back to scalar

bool avx2_available() { return false; }
const Ops& avx2_ops() { return scalar_ops(); }

#endif

}  // namespace oed::kernels
