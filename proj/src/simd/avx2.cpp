#include <cmath>

#include "backends.hpp"

#if defined(__x86_64__) && defined(__AVX2__)
#include <immintrin.h>

namespace chaosbound::simd::detail {
namespace {

inline __m256d abs_pd(__m256d v) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v);
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  hi = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, hi));
}

// mul + add, not fma: keeps results bit-identical to the scalar reference.
void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_add_pd(y0, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    y1 = _mm256_add_pd(y1, _mm256_mul_pd(va, _mm256_loadu_pd(x + i + 4)));
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    y0 = _mm256_add_pd(y0, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, y0);
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale_avx2(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

double max_abs_avx2(const double* x, std::size_t n) {
  __m256d m0 = _mm256_setzero_pd();
  __m256d m1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    m0 = _mm256_max_pd(m0, abs_pd(_mm256_loadu_pd(x + i)));
    m1 = _mm256_max_pd(m1, abs_pd(_mm256_loadu_pd(x + i + 4)));
  }
  for (; i + 4 <= n; i += 4) m0 = _mm256_max_pd(m0, abs_pd(_mm256_loadu_pd(x + i)));
  double m = hmax(_mm256_max_pd(m0, m1));
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    m = v > m ? v : m;
  }
  return m;
}

double max_abs_diff_avx2(const double* x, const double* y, std::size_t n) {
  __m256d m0 = _mm256_setzero_pd();
  __m256d m1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    m0 = _mm256_max_pd(
        m0, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i))));
    m1 = _mm256_max_pd(m1, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i + 4),
                                                _mm256_loadu_pd(y + i + 4))));
  }
  for (; i + 4 <= n; i += 4)
    m0 = _mm256_max_pd(
        m0, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i))));
  double m = hmax(_mm256_max_pd(m0, m1));
  for (; i < n; ++i) {
    const double v = std::fabs(x[i] - y[i]);
    m = v > m ? v : m;
  }
  return m;
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), s1);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), s0);
  s0 = _mm256_add_pd(s0, s1);
  __m128d lo = _mm256_castpd256_pd128(s0);
  __m128d hi = _mm256_extractf128_pd(s0, 1);
  lo = _mm_add_pd(lo, hi);
  hi = _mm_unpackhi_pd(lo, lo);
  double s = _mm_cvtsd_f64(_mm_add_sd(lo, hi));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

constexpr KernelTable kAvx2{Backend::avx2, axpy_avx2, scale_avx2,
                            max_abs_avx2, max_abs_diff_avx2, dot_avx2};

}  // namespace

const KernelTable* avx2_table() { return &kAvx2; }

}  // namespace chaosbound::simd::detail

#else

namespace chaosbound::simd::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace chaosbound::simd::detail

#endif
