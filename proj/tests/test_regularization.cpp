#include <doctest.h>

#include <cmath>
#include <vector>

#include "chaosbound/errors.hpp"
#include "chaosbound/regularization.hpp"
#include "oracles.hpp"

using namespace chaosbound;

namespace {

PathVector random_path(double horizon, std::size_t steps, GaussianStream& rng) {
  std::vector<double> v(steps + 1);
  rng.fill(v);
  return PathVector(horizon, steps, 1, v);
}

// max over a fine uniform grid of |f(s) - f(t)|, |s - t| <= eps; a lower
// bound for the true modulus that converges from below.
double sampled_modulus(const PathVector& path, double eps, std::size_t fine) {
  std::vector<double> t(fine + 1), v(fine + 1);
  const std::size_t g = path.steps();
  for (std::size_t k = 0; k <= fine; ++k) {
    t[k] = path.horizon() * static_cast<double>(k) / static_cast<double>(fine);
    const double x = static_cast<double>(k) * static_cast<double>(g) / static_cast<double>(fine);
    const std::size_t i = std::min(g - 1, static_cast<std::size_t>(x));
    const double w = x - static_cast<double>(i);
    v[k] = (1 - w) * path.at(i) + w * path.at(i + 1);
  }
  double best = 0.0;
  for (std::size_t a = 0; a <= fine; ++a)
    for (std::size_t b = a + 1; b <= fine && t[b] - t[a] <= eps + 1e-15; ++b)
      best = std::max(best, std::abs(v[a] - v[b]));
  return best;
}

}  // namespace

TEST_CASE("regularize matches fine quadrature") {
  GaussianStream rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const double horizon = 0.5 + trial % 3;
    const std::size_t steps = 1 + static_cast<std::size_t>(trial) * 3 % 17;
    const PathVector path = random_path(horizon, steps, rng);
    for (double rel : {0.003, 0.05, 0.3, 0.9, 2.0}) {
      const double eps = rel * horizon;
      const PathVector out = regularize(path, eps);
      const std::vector<double> v(path.values().begin(), path.values().end());
      const auto expect = oracle::regularize_quadrature(v, horizon, eps, 20000);
      for (std::size_t i = 0; i < out.nodes(); ++i) CHECK(std::abs(out.at(i) - expect[i]) <= 1e-6);
    }
  }
}

TEST_CASE("regularize is linear and a sup-norm contraction") {
  GaussianStream rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    const PathVector a = random_path(1.0, 50, rng), b = random_path(1.0, 50, rng);
    const double eps = 0.01 + 0.02 * trial;
    PathAccumulator acc(a);
    acc.add_scaled(2.0, a);
    acc.add_scaled(-0.5, b);
    const PathVector lhs = regularize(acc.finish(), eps);
    const PathVector ra = regularize(a, eps), rb = regularize(b, eps);
    for (std::size_t i = 0; i < lhs.nodes(); ++i)
      CHECK(lhs.at(i) == doctest::Approx(2.0 * ra.at(i) - 0.5 * rb.at(i)).epsilon(1e-12));
    CHECK(ra.sup_norm() <= a.sup_norm() * (1 + 1e-14));
  }
}

TEST_CASE("constants are fixed points and affine paths are fixed inside") {
  for (double c : {0.0, -3.25, 1e6}) {
    const PathVector k = PathVector::from_function(2.0, 37, [c](double) { return c; });
    for (double eps : {1e-4, 0.1, 0.77, 5.0}) CHECK(regularize(k, eps) == k);
  }
  const PathVector line = PathVector::from_function(1.0, 100, [](double t) { return 3 * t - 1; });
  for (double eps : {0.005, 0.1, 0.25}) {
    const PathVector out = regularize(line, eps);
    for (std::size_t i = 0; i < out.nodes(); ++i) {
      const double t = out.time(i);
      if (t >= eps - 1e-12 && t <= 1.0 - eps + 1e-12) CHECK(out.at(i) == doctest::Approx(line.at(i)).epsilon(1e-12));
    }
    // clamping pulls the ends toward the interior
    CHECK(out.at(0) > line.at(0));
    CHECK(out.at(100) < line.at(100));
  }
}

TEST_CASE("modulus of continuity on known paths") {
  const PathVector line = PathVector::from_function(1.0, 10, [](double t) { return 2 * t; });
  CHECK(modulus_of_continuity(line, 0.25) == doctest::Approx(0.5));
  CHECK(modulus_of_continuity(line, 3.0) == doctest::Approx(2.0));
  CHECK(modulus_of_continuity(line, 0.0) == 0.0);
  const PathVector tent(1.0, 2, 1, {0.0, 1.0, 0.0});
  CHECK(modulus_of_continuity(tent, 0.2) == doctest::Approx(0.4));
  CHECK(modulus_of_continuity(tent, 0.5) == doctest::Approx(1.0));
  CHECK(modulus_of_continuity(tent, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("modulus agrees with dense pair sampling") {
  GaussianStream rng(43);
  for (int trial = 0; trial < 15; ++trial) {
    const PathVector path = random_path(1.0, 2 + static_cast<std::size_t>(trial % 7), rng);
    for (double eps : {0.04, 0.13, 0.5}) {
      const double exact = modulus_of_continuity(path, eps);
      const double sampled = sampled_modulus(path, eps, 2400);
      CHECK(sampled <= exact + 1e-12);
      CHECK(sampled >= exact - 0.01 * std::max(1.0, exact));
    }
  }
}

TEST_CASE("smoothing error never exceeds the modulus") {
  GaussianStream rng(44);
  for (int trial = 0; trial < 200; ++trial) {
    const double horizon = 0.3 + 0.1 * (trial % 20);
    const PathVector path = random_path(horizon, 1 + static_cast<std::size_t>(trial % 25), rng);
    for (double rel : {0.001, 0.02, 0.1, 0.4, 1.0, 3.0}) {
      const double eps = rel * horizon;
      CHECK(sup_distance(regularize(path, eps), path) <= modulus_of_continuity(path, eps));
    }
  }
}

TEST_CASE("two-dimensional paths use the Euclidean norm") {
  const PathVector circle(1.0, 4, 2, {1, 0, 0, 1, -1, 0, 0, -1, 1, 0});
  CHECK(modulus_of_continuity(circle, 0.25) == doctest::Approx(std::sqrt(2.0)));
  const PathVector out = regularize(circle, 0.1);
  CHECK(out.dim() == 2);
  CHECK(sup_distance(out, circle) <= modulus_of_continuity(circle, 0.1));
}

TEST_CASE("Brownian regularization gap") {
  const PathSampler bm = brownian_sampler(1.0, 400);
  double previous = 0.0;
  for (double eps : {0.01, 0.05, 0.2}) {
    const auto rep = regularization_gap_mc(bm, eps, 400, 7);
    CHECK(rep.mean_sup_gap >= 0.0);
    CHECK(rep.mean_sup_gap > previous);
    CHECK(rep.samples == 400);
    previous = rep.mean_sup_gap;
  }
  CHECK(regularization_gap_mc(bm, 0.05, 300, 9).mean_sup_gap ==
        regularization_gap_mc(bm, 0.05, 300, 9).mean_sup_gap);
}

TEST_CASE("Garsia-Rodemich-Rumsey constants") {
  const double s = 4.0, eta = 0.1, horizon = 2.0;
  const double tail = std::pow(2.0 / (eta * s), 1.0 / s) * std::pow(horizon, (1 + eta * s) / s);
  CHECK(grr_constant(2, s, eta, horizon, GrrMode::printed) ==
        doctest::Approx(8.0 * std::pow(1.0, 2.0) * std::sqrt(2.0) * tail));
  CHECK(grr_constant(2, s, eta, horizon, GrrMode::hypercontractive) ==
        doctest::Approx(8.0 * std::pow(3.0, 1.0) * std::sqrt(2.0) * tail));
  CHECK(grr_constant(1, s, eta, horizon, GrrMode::printed) == 0.0);
  CHECK(grr_constant(1, s, eta, horizon, GrrMode::hypercontractive) > 0.0);
  CHECK(holder_reg_exponent(0.5, 4.0, 0.1) == doctest::Approx(0.15));
  const double b1 = holder_reg_bound(2.0, 0.5, 4.0, 0.1, 0.01, 2, 1.0, GrrMode::hypercontractive);
  const double b2 = holder_reg_bound(2.0, 0.5, 4.0, 0.1, 0.04, 2, 1.0, GrrMode::hypercontractive);
  CHECK(b2 / b1 == doctest::Approx(std::pow(4.0, 0.15)));
  CHECK_THROWS_AS(holder_reg_bound(1, 0.5, 2.0, 0.1, 0.1, 2, 1, GrrMode::printed), DomainError);
  CHECK_THROWS_AS(holder_reg_bound(1, 0.5, 4.0, 0.3, 0.1, 2, 1, GrrMode::printed), DomainError);
  CHECK_THROWS_AS(grr_constant(2, 2.0, 0.1, 1.0, GrrMode::printed), DomainError);
}

TEST_CASE("bad arguments") {
  const PathVector p = PathVector::zero(1.0, 3);
  CHECK_THROWS_AS(regularize(p, 0.0), DomainError);
  CHECK_THROWS_AS(regularize(PathVector::point({1.0}), 0.1), DomainError);
  CHECK_THROWS_AS(modulus_of_continuity(p, -1.0), DomainError);
}
