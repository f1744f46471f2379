#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaosbound/chaos.hpp"
#include "chaosbound/errors.hpp"
#include "oracles.hpp"

using namespace chaosbound;

namespace {

std::vector<double> as_vector(const GaussianDraw& d) {
  return {d.values().begin(), d.values().end()};
}

ScalarKernel random_general(int p, Index n, std::size_t entries, GaussianStream& rng) {
  KernelBuilder b(p, n, false);
  std::vector<Index> t(static_cast<std::size_t>(p));
  for (std::size_t e = 0; e < entries; ++e) {
    for (auto& i : t) i = 1 + static_cast<Index>(rng.uniform() * n) % n;
    b.add(t, rng());
  }
  return b.build();
}

bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(1.0, std::abs(b));
}

}  // namespace

TEST_CASE("probabilists' Hermite polynomials") {
  for (double x : {-2.5, -1.0, 0.0, 0.3, 1.7}) {
    CHECK(hermite(0, x) == 1.0);
    CHECK(hermite(1, x) == x);
    CHECK(hermite(2, x) == doctest::Approx(x * x - 1));
    CHECK(hermite(3, x) == doctest::Approx(x * x * x - 3 * x));
    CHECK(hermite(4, x) == doctest::Approx(x * x * x * x - 6 * x * x + 3));
  }
}

TEST_CASE("integral of a basis power is a Hermite polynomial") {
  const GaussianDraw draw = GaussianDraw::sample(5, 3);
  for (int p = 0; p <= 5; ++p)
    for (Index i = 1; i <= 5; ++i) {
      const ScalarKernel f = ScalarKernel::basis_power(i, p, 5, 1.5);
      CHECK(sample_scalar_integral(f, draw) == doctest::Approx(1.5 * hermite(p, draw.at(i))));
    }
}

TEST_CASE("multiple integrals match the Wick expansion") {
  GaussianStream rng(21);
  for (int trial = 0; trial < 80; ++trial) {
    const int p = 1 + trial % 4;
    const Index n = 1 + static_cast<Index>(trial % 6);
    const ScalarKernel f = trial % 2 ? random_symmetric_kernel(p, n, 6, rng)
                                     : random_general(p, n, 6, rng);
    const ChaosEvaluator eval(f);
    for (int d = 0; d < 5; ++d) {
      const GaussianDraw draw = GaussianDraw::sample(n, rng);
      const double expect = oracle::wick_integral(f, as_vector(draw));
      CHECK(close(eval(draw), expect, 1e-11));
      CHECK(close(sample_scalar_integral(f, draw), expect, 1e-11));
    }
  }
}

TEST_CASE("reject policy refuses general kernels") {
  GaussianStream rng(22);
  const ScalarKernel f = random_general(2, 3, 4, rng);
  CHECK_THROWS_AS(ChaosEvaluator(f, SymmetryPolicy::reject), DomainError);
  CHECK_NOTHROW(ChaosEvaluator(symmetrize(f), SymmetryPolicy::reject));
}

TEST_CASE("draw size must match the truncation") {
  const ScalarKernel f = ScalarKernel::basis_power(1, 2, 4);
  CHECK_THROWS_AS(sample_scalar_integral(f, GaussianDraw::sample(3, 1)), DomainError);
}

TEST_CASE("sampling is deterministic in the seed") {
  GaussianStream rng(23);
  const ScalarKernel f = random_symmetric_kernel(3, 5, 6, rng);
  const auto a = integral_variance_mc(f, 5000, 9);
  const auto b = integral_variance_mc(f, 5000, 9);
  CHECK(a.estimate == b.estimate);
  CHECK(a.standard_error == b.standard_error);
  const auto d1 = GaussianDraw::sample(6, 4, 2), d2 = GaussianDraw::sample(6, 4, 2);
  CHECK(as_vector(d1) == as_vector(d2));
  CHECK(as_vector(GaussianDraw::sample(6, 4, 3)) != as_vector(d1));
}

TEST_CASE("isometry and orthogonality hold in Monte Carlo") {
  GaussianStream rng(24);
  for (int p = 1; p <= 4; ++p) {
    const ScalarKernel f = random_symmetric_kernel(p, 4, 4, rng);
    const auto mc = integral_variance_mc(f, 40000, 100 + p);
    CAPTURE(p);
    CHECK(std::abs(mc.estimate - isometry_variance(f)) <= 3 * mc.standard_error);
  }
  for (int p = 1; p <= 3; ++p) {
    const ScalarKernel f = random_symmetric_kernel(p, 4, 4, rng);
    const ScalarKernel g = random_symmetric_kernel(p + 1, 4, 4, rng);
    const auto cov = integral_covariance_mc(f, g, 40000, 200 + p);
    CHECK(std::abs(cov.estimate) <= 3 * cov.standard_error);
  }
}

TEST_CASE("Malliavin derivatives match the gradient of the Wick polynomial") {
  GaussianStream rng(25);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 1 + trial % 4, q = 1 + (trial / 4) % 3;
    const Index n = 2 + static_cast<Index>(trial % 4);
    const ScalarKernel f = random_general(p, n, 5, rng);
    const ScalarKernel g = random_symmetric_kernel(q, n, 5, rng);
    const auto comps = malliavin_components(f);
    REQUIRE(comps.size() == n);
    const GaussianDraw draw = GaussianDraw::sample(n, rng);
    const auto grad_f = oracle::wick_gradient(f, as_vector(draw));
    const auto grad_g = oracle::wick_gradient(g, as_vector(draw));
    double gamma = 0.0;
    for (Index k = 0; k < n; ++k) {
      CHECK(close(sample_scalar_integral(comps[k], draw), grad_f[k], 1e-10));
      gamma += grad_f[k] * grad_g[k];
    }
    CHECK(close(malliavin_gamma(f, g, draw), gamma, 1e-10));
  }
  CHECK(malliavin_components(ScalarKernel::constant(2.0, 3)).empty());
}

TEST_CASE("product formula coefficients and residuals") {
  CHECK(product_coefficient(2, 2, 0) == 1.0);
  CHECK(product_coefficient(2, 2, 1) == 4.0);
  CHECK(product_coefficient(2, 2, 2) == 2.0);
  CHECK(product_coefficient(3, 2, 2) == 6.0);
  GaussianStream rng(26);
  for (int trial = 0; trial < 30; ++trial) {
    const ScalarKernel f = random_general(1 + trial % 3, 4, 4, rng);
    const ScalarKernel g = random_symmetric_kernel(1 + (trial / 3) % 3, 4, 4, rng);
    for (int d = 0; d < 10; ++d) {
      const GaussianDraw draw = GaussianDraw::sample(4, rng);
      CHECK(product_formula_check(f, g, draw) <= 1e-9);
    }
  }
}

TEST_CASE("moment equivalence constants") {
  for (int p = 0; p <= 4; ++p) {
    const auto h = isometry_constants(p, 2.0, 1.0, IsometryMode::hilbert);
    CHECK(h.lower == doctest::Approx(std::sqrt(oracle::factorial(p))));
    CHECK(h.upper == h.lower);
  }
  const auto c = isometry_constants(2, 4.0, 1.5);
  CHECK(c.lower == doctest::Approx(std::pow(2.0, 0.25) * std::sqrt(0.5) / 1.5));
  CHECK(c.upper == doctest::Approx(std::pow(4.0, 7.0 / 4.0) * std::sqrt(2.0) * 1.5));
  CHECK(c.lower <= c.upper);
  CHECK_THROWS_AS(isometry_constants(2, 3.0, 1.0, IsometryMode::hilbert), DomainError);
  CHECK(apply_neg_Linv(3) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(apply_neg_Linv(0), DomainError);
}

TEST_CASE("vector integrals are sums of scalar integrals times paths") {
  GaussianStream rng(27);
  const PathVector x = PathVector::from_function(1.0, 6, [](double t) { return t * t; });
  const PathVector y = PathVector::from_function(1.0, 6, [](double t) { return std::cos(t); });
  const ScalarKernel a = random_symmetric_kernel(2, 3, 3, rng);
  const ScalarKernel b = random_symmetric_kernel(2, 3, 3, rng);
  VectorKernel f(2, 3, x);
  f.add_term(a, x);
  f.add_term(b, y);
  const GaussianDraw draw = GaussianDraw::sample(3, rng);
  const PathVector out = sample_vector_integral(f, draw);
  const double ia = sample_scalar_integral(a, draw), ib = sample_scalar_integral(b, draw);
  for (std::size_t i = 0; i < out.nodes(); ++i)
    CHECK(out.at(i) == doctest::Approx(ia * x.at(i) + ib * y.at(i)));
}
