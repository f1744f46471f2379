#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "chaosbound/path.hpp"
#include "chaosbound/random.hpp"
#include "chaosbound/simd.hpp"

using namespace chaosbound;

namespace {

std::vector<simd::Backend> vector_backends() {
  std::vector<simd::Backend> out;
  for (auto b : {simd::Backend::avx2, simd::Backend::neon})
    if (simd::backend_supported(b)) out.push_back(b);
  return out;
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
  GaussianStream rng(seed);
  std::vector<double> v(n);
  rng.fill(v);
  return v;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::backend_supported(simd::Backend::scalar));
  CHECK(simd::kernels_for(simd::Backend::scalar).backend == simd::Backend::scalar);
  CHECK(simd::backend_name(simd::Backend::avx2) == "avx2");
}

TEST_CASE("unsupported backends are rejected") {
  for (auto b : {simd::Backend::avx2, simd::Backend::neon})
    if (!simd::backend_supported(b)) CHECK_THROWS_AS(simd::kernels_for(b), std::invalid_argument);
}

TEST_CASE("vector backends match the scalar reference") {
  const auto& ref = simd::kernels_for(simd::Backend::scalar);
  for (auto b : vector_backends()) {
    const auto& k = simd::kernels_for(b);
    CAPTURE(simd::backend_name(b));
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 8u, 15u, 16u, 17u, 31u, 100u, 1001u}) {
      CAPTURE(n);
      const auto x = noise(n, 1 + n);
      const auto y0 = noise(n, 1000 + n);

      auto y_ref = y0, y_vec = y0;
      ref.axpy(0.37, x.data(), y_ref.data(), n);
      k.axpy(0.37, x.data(), y_vec.data(), n);
      CHECK(y_ref == y_vec);

      auto s_ref = x, s_vec = x;
      ref.scale(-1.75, s_ref.data(), n);
      k.scale(-1.75, s_vec.data(), n);
      CHECK(s_ref == s_vec);

      CHECK(ref.max_abs(x.data(), n) == k.max_abs(x.data(), n));
      CHECK(ref.max_abs_diff(x.data(), y0.data(), n) == k.max_abs_diff(x.data(), y0.data(), n));

      const double d_ref = ref.dot(x.data(), y0.data(), n);
      const double d_vec = k.dot(x.data(), y0.data(), n);
      double scale = 0.0;
      for (std::size_t i = 0; i < n; ++i) scale += std::abs(x[i] * y0[i]);
      CHECK(std::abs(d_ref - d_vec) <= 1e-14 * std::max(1.0, scale));
    }
  }
}

TEST_CASE("max reductions see the extreme entry in every lane position") {
  for (auto b : vector_backends()) {
    const auto& k = simd::kernels_for(b);
    for (std::size_t n = 1; n <= 19; ++n)
      for (std::size_t at = 0; at < n; ++at) {
        std::vector<double> x(n, 0.5), y(n, 0.0);
        x[at] = -7.0;
        CHECK(k.max_abs(x.data(), n) == 7.0);
        CHECK(k.max_abs_diff(x.data(), y.data(), n) == 7.0);
      }
  }
}

TEST_CASE("path arithmetic is identical under every backend") {
  const auto x = noise(513, 9);
  const PathVector a(1.0, 512, 1, x);
  const PathVector b(1.0, 512, 1, noise(513, 10));
  const auto original = simd::active_backend();
  simd::set_backend(simd::Backend::scalar);
  const double sup_ref = a.sup_norm();
  const double dist_ref = sup_distance(a, b);
  PathAccumulator acc_ref(a);
  acc_ref.add_scaled(0.3, a);
  acc_ref.add_scaled(-1.1, b);
  const PathVector sum_ref = acc_ref.finish();
  for (auto be : vector_backends()) {
    simd::set_backend(be);
    CHECK(simd::active_backend() == be);
    CHECK(a.sup_norm() == sup_ref);
    CHECK(sup_distance(a, b) == dist_ref);
    PathAccumulator acc(a);
    acc.add_scaled(0.3, a);
    acc.add_scaled(-1.1, b);
    CHECK(acc.finish() == sum_ref);
  }
  simd::set_backend(original);
}
