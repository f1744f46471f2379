#pragma once

// Data-parallel inner loops used by the path arithmetic, the transport cost
// matrix and the covariance accumulation.
//
// Every kernel exists as a portable scalar reference and as vectorized
// variants (AVX2 on x86-64, NEON on AArch64). The variant is selected once at
// startup from the CPU feature set; CHAOSBOUND_SIMD=scalar|avx2|neon in the
// environment forces a choice. Elementwise kernels and max-reductions are
// bit-identical across backends; dot() may differ in the last bits because
// the summation order differs.

#include <cstddef>
#include <span>
#include <string_view>

namespace chaosbound::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  Backend backend;
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  void (*scale)(double a, double* x, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  double (*max_abs_diff)(const double* x, const double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
};

std::string_view backend_name(Backend b);
bool backend_supported(Backend b);

// Throws std::invalid_argument if the backend is not available on this CPU
// or was not compiled in.
const KernelTable& kernels_for(Backend b);

Backend active_backend();
void set_backend(Backend b);

// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
// x *= a
void scale(double a, std::span<double> x);
double max_abs(std::span<const double> x);
double max_abs_diff(std::span<const double> x, std::span<const double> y);
double dot(std::span<const double> x, std::span<const double> y);

}  // namespace chaosbound::simd
