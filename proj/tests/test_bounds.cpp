#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "chaosbound/bounds.hpp"
#include "chaosbound/errors.hpp"
#include "chaosbound/gamma.hpp"
#include "oracles.hpp"

using namespace chaosbound;

namespace {

double k_td(double horizon, double d, double s_d) {
  return 4.0 * (horizon + 2.0) * (std::sqrt(horizon) * s_d + std::sqrt(d));
}

double regularized_total(double m, double alpha, double eps, double horizon, double d,
                         double s_d, double dev) {
  return dbl_bound_regularized(m * std::pow(eps, alpha), m * std::pow(eps, alpha), dev, eps,
                               horizon, d, s_d)
      .total;
}

}  // namespace

TEST_CASE("C_Td") {
  CHECK(c_td(1.0, 1.0, 1.25) == doctest::Approx(1.5 * std::cbrt(4.0 * 3.0 * 2.25)));
  CHECK(c_td(2.0, 3.0, 2.0) ==
        doctest::Approx(1.5 * std::cbrt(4.0 * 4.0 * (std::sqrt(2.0) * 2.0 + std::sqrt(3.0)))));
  CHECK_THROWS_AS(c_td(-1.0, 1.0, 1.0), DomainError);
}

TEST_CASE("regularized bound formula") {
  const auto c = dbl_bound_regularized(0.1, 0.2, 0.008, 0.125, 1.0, 1.0, 1.25);
  const double smoothing = c_td(1.0, 1.0, 1.25) * 4.0 * 0.2;
  CHECK(c.total == doctest::Approx(0.3 + smoothing));
  CHECK(c.term("smoothing") == doctest::Approx(smoothing));
  CHECK(dbl_bound_regularized(0, 0, 0, 0.1, 1, 1, 1.2).total == 0.0);
  CHECK_THROWS_AS(dbl_bound_regularized(-0.1, 0, 0, 0.1, 1, 1, 1.2), DomainError);
  CHECK_THROWS_AS(dbl_bound_regularized(0, 0, 0, 0.0, 1, 1, 1.2), DomainError);
}

TEST_CASE("optimized Hoelder bound is the minimum over epsilon of the regularized bound") {
  for (double alpha : {0.25, 0.5, 1.0})
    for (double dev : {1e-6, 1e-3, 0.2})
      for (double m : {0.3, 1.0, 4.0}) {
        const double horizon = 1.0, d = 1.0, s_d = 1.25;
        const auto h = dbl_bound_holder(m, alpha, horizon, d, s_d, dev);
        double grid_min = std::numeric_limits<double>::infinity();
        for (int k = -4000; k <= 1000; ++k) {
          const double eps = std::pow(10.0, k / 500.0);
          grid_min = std::min(grid_min, regularized_total(m, alpha, eps, horizon, d, s_d, dev));
        }
        CAPTURE(alpha);
        CAPTURE(dev);
        CHECK(h.total <= grid_min * (1 + 1e-12));
        CHECK(h.total >= grid_min * (1 - 1e-4));
        const double eps_star = h.term("optimal_epsilon");
        CHECK(regularized_total(m, alpha, eps_star, horizon, d, s_d, dev) ==
              doctest::Approx(h.total).epsilon(1e-12));
      }
}

TEST_CASE("printed Hoelder form") {
  const double m = 2.0, a = 0.5, dev = 0.01, horizon = 1.0, d = 1.0, s_d = 1.25;
  const auto p = dbl_bound_holder(m, a, horizon, d, s_d, dev, HolderMode::printed);
  const double expo = a / (a + 2.0 / 3.0);
  const double constant = m * (2 + 3 * a) / (2 * std::pow(m * a, 3 * a / (3 * a + 2))) *
                          std::pow(k_td(horizon, d, s_d), expo);
  CHECK(p.term("exponent") == doctest::Approx(expo));
  CHECK(p.total == doctest::Approx(constant * std::pow(dev, expo)));
  CHECK(dbl_bound_holder(m, a, horizon, d, s_d, 0.0, HolderMode::printed).total == 0.0);
  CHECK(dbl_bound_holder(m, a, horizon, d, s_d, 0.0).total == 0.0);
}

TEST_CASE("certificates round trip and detect tampering") {
  std::vector<BoundCertificate> certs = {
      dbl_bound_regularized(0.1, 0.2, 0.008, 0.125, 1.0, 1.0, 1.25),
      dbl_bound_holder(1.0, 0.5, 1.0, 1.0, 1.25, 0.01),
      dbl_bound_holder(1.0, 0.5, 1.0, 1.0, 1.25, 0.01, HolderMode::printed),
      contraction_rate_certificate({0.5, 1.0, 1.0, 1.0, 1.25, 3, 0.02, {0.1, 0.05}}),
      hilbert_contraction_certificate(3, 0.02, {0.1, 0.05})};
  for (const auto& c : certs) {
    CAPTURE(c.bound_name);
    CHECK(verify_certificate(c));
    const auto j = to_json(c);
    for (const char* key : {"bound_name", "inputs", "terms", "total", "paper_ref"})
      CHECK(j.contains(key));
    const auto back = certificate_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.total == c.total);
    CHECK(back.terms.size() == c.terms.size());

    auto bad_total = j;
    bad_total["total"] = c.total * (1 + 1e-9) + 1e-9;
    CHECK_THROWS_AS(certificate_from_json(bad_total), DomainError);
    auto bad_input = j;
    bad_input["inputs"]["T"] = 7.0;
    if (j["inputs"].contains("T")) CHECK_THROWS_AS(certificate_from_json(bad_input), DomainError);
    auto bad_term = j;
    bad_term["terms"][0]["value"] = bad_term["terms"][0]["value"].get<double>() + 1.0;
    CHECK_THROWS_AS(certificate_from_json(bad_term), DomainError);
  }
  auto unknown = to_json(certs[0]);
  unknown["bound_name"] = "nonsense";
  CHECK_THROWS_AS(certificate_from_json(unknown), DomainError);
}

TEST_CASE("contraction-rate certificate") {
  const double beta = 0.5, m = 1.0;
  const ContractionRateInputs in{beta, m, 1.0, 1.0, 1.25, 3, 0.02, {0.1, 0.05}};
  const auto c = contraction_rate_certificate(in);
  const double alpha = beta / (3 * beta + 2);
  CHECK(c.term("alpha") == doctest::Approx(1.0 / 7.0));
  const double constant = dbl_bound_holder(m, beta, 1.0, 1.0, 1.25, 1.0).term("constant");
  CHECK(c.term("constant") == doctest::Approx(constant));
  const double w1 = 9.0 * 1 * std::sqrt(24.0) / 3.0;  // a_{3,3,1} = 9
  const double w2 = 36.0 * std::sqrt(2.0) / 3.0;      // a_{3,3,2} = 36
  const double expect = constant * (std::pow(0.02, alpha) + std::pow(w1 * 0.1, alpha) +
                                    std::pow(w2 * 0.05, alpha));
  CHECK(c.total == doctest::Approx(expect));
  // scaling all inputs by n^{-1/2} scales the total by n^{-alpha/2}
  const ContractionRateInputs small{beta, m, 1.0, 1.0, 1.25, 3, 0.02 / 8, {0.1 / 8, 0.05 / 8}};
  CHECK(contraction_rate_certificate(small).total / c.total ==
        doctest::Approx(std::pow(8.0, -alpha)));
  CHECK_THROWS_AS(contraction_rate_certificate({beta, m, 1, 1, 1.25, 3, 0.02, {0.1}}), DomainError);
  const auto zero = contraction_rate_certificate({beta, m, 1, 1, 1.25, 2, 0.0, {0.0}});
  CHECK(zero.total == 0.0);
}

TEST_CASE("Hilbert contraction certificate and conversions") {
  const auto c = hilbert_contraction_certificate(2, 0.3, {0.1});
  CHECK(c.total == doctest::Approx(0.15 + std::sqrt(2.0) * 4.0 * 0.1 / 4.0));
  CHECK(hilbert_contraction_certificate(1, 0.0, {}).total == 0.0);
  CHECK(rho_inf_bound(0.4) == doctest::Approx(0.2));
  const auto lp = lp_bl_convert(0.1, 0.4);
  CHECK(lp.first == doctest::Approx(0.05));
  CHECK(lp.second == doctest::Approx(0.6));
}

TEST_CASE("bounds computed from kernels") {
  const PathVector x = PathVector::from_function(1.0, 6, [](double t) { return t; });
  VectorKernel f(2, 3, x);
  f.add_term(ScalarKernel::basis_power(1, 2, 3, 0.5), x);
  f.add_term(ScalarKernel::basis_power(2, 2, 3, 0.5), x.scaled(-1.0));
  const Eigen::MatrixXd r_f = covariance_tensor(f, f).matrix;
  const auto norms = self_contraction_norms(f);
  REQUIRE(norms.size() == 1);
  CHECK(norms[0] > 0.0);
  const auto c = hilbert_contraction_bound(f, r_f, r_f);
  CHECK(c.term("covariance_term") == 0.0);
  CHECK(verify_certificate(c));
  const auto rate = dbl_contraction_rate_bound(f, r_f, r_f * 0.5, 0.5, 1.0, 1.0, 1.0, 1.25);
  CHECK(verify_certificate(rate));
  CHECK(rate.total > 0.0);
}

TEST_CASE("expected Brownian supremum") {
  const auto s = estimate_sd(1, 20000, 1000, 3);
  const double exact = std::sqrt(std::numbers::pi / 2.0);
  // the grid maximum sits below the continuous one
  CHECK(s.estimate <= exact + 3 * s.standard_error);
  CHECK(s.estimate >= exact - 0.05);
  CHECK(estimate_sd(1, 2000, 100, 3).estimate == estimate_sd(1, 2000, 100, 3).estimate);
}
