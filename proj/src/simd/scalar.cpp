#include <cmath>

#include "backends.hpp"

namespace chaosbound::simd::detail {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void scale_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = a * x[i];
}

double max_abs_scalar(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(x[i]);
    m = v > m ? v : m;
  }
  return m;
}

double max_abs_diff_scalar(const double* x, const double* y, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(x[i] - y[i]);
    m = v > m ? v : m;
  }
  return m;
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

constexpr KernelTable kScalar{Backend::scalar, axpy_scalar, scale_scalar,
                              max_abs_scalar, max_abs_diff_scalar, dot_scalar};

}  // namespace

const KernelTable& scalar_table() { return kScalar; }

}  // namespace chaosbound::simd::detail
