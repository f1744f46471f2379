#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "backends.hpp"

namespace chaosbound::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* table_or_null(Backend b) {
  switch (b) {
    case Backend::scalar:
      return &detail::scalar_table();
    case Backend::avx2:
      return cpu_has_avx2() ? detail::avx2_table() : nullptr;
    case Backend::neon:
      return detail::neon_table();  // NEON is baseline on AArch64
  }
  return nullptr;
}

const KernelTable* initial_table() {
  if (const char* env = std::getenv("CHAOSBOUND_SIMD")) {
    const std::string want(env);
    for (Backend b : {Backend::scalar, Backend::avx2, Backend::neon}) {
      if (want == backend_name(b)) {
        if (const KernelTable* t = table_or_null(b)) return t;
      }
    }
  }
  if (const KernelTable* t = table_or_null(Backend::avx2)) return t;
  if (const KernelTable* t = table_or_null(Backend::neon)) return t;
  return &detail::scalar_table();
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

inline const KernelTable& current() {
  return *active().load(std::memory_order_relaxed);
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("simd: operand length mismatch");
}

}  // namespace

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

bool backend_supported(Backend b) { return table_or_null(b) != nullptr; }

const KernelTable& kernels_for(Backend b) {
  const KernelTable* t = table_or_null(b);
  if (t == nullptr)
    throw std::invalid_argument("simd backend not available: " +
                                std::string(backend_name(b)));
  return *t;
}

Backend active_backend() { return current().backend; }

void set_backend(Backend b) { active().store(&kernels_for(b)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  current().axpy(a, x.data(), y.data(), x.size());
}

void scale(double a, std::span<double> x) { current().scale(a, x.data(), x.size()); }

double max_abs(std::span<const double> x) { return current().max_abs(x.data(), x.size()); }

double max_abs_diff(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size(), y.size());
  return current().max_abs_diff(x.data(), y.data(), x.size());
}

double dot(std::span<const double> x, std::span<const double> y) {
  check_sizes(x.size(), y.size());
  return current().dot(x.data(), y.data(), x.size());
}

}  // namespace chaosbound::simd
