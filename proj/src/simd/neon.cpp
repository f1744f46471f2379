#include <cmath>

#include "backends.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)
#include <arm_neon.h>

namespace chaosbound::simd::detail {
namespace {

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vaddq_f64(vy, vmulq_f64(va, vld1q_f64(x + i)));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale_neon(double a, double* x, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] = a * x[i];
}

double max_abs_neon(const double* x, std::size_t n) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) m = vmaxq_f64(m, vabsq_f64(vld1q_f64(x + i)));
  double r = vmaxvq_f64(m);
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    r = v > r ? v : r;
  }
  return r;
}

double max_abs_diff_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    m = vmaxq_f64(m, vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double r = vmaxvq_f64(m);
  for (; i < n; ++i) {
    const double v = std::fabs(x[i] - y[i]);
    r = v > r ? v : r;
  }
  return r;
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) s = vfmaq_f64(s, vld1q_f64(x + i), vld1q_f64(y + i));
  double r = vaddvq_f64(s);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

constexpr KernelTable kNeon{Backend::neon, axpy_neon, scale_neon,
                            max_abs_neon, max_abs_diff_neon, dot_neon};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace chaosbound::simd::detail

#else

namespace chaosbound::simd::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace chaosbound::simd::detail

#endif
