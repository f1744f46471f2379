#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "chaosbound/errors.hpp"
#include "chaosbound/kernel_io.hpp"
#include "chaosbound/kernels.hpp"
#include "oracles.hpp"

using namespace chaosbound;

namespace {

ScalarKernel random_general(int p, Index n, std::size_t entries, GaussianStream& rng) {
  KernelBuilder b(p, n, false);
  std::vector<Index> t(static_cast<std::size_t>(p));
  for (std::size_t e = 0; e < entries; ++e) {
    for (auto& i : t) i = 1 + static_cast<Index>(rng.uniform() * n) % n;
    b.add(t, rng());
  }
  return b.build();
}

void check_dense_equal(const ScalarKernel& f, const oracle::Dense& d, double tol) {
  const oracle::Dense got = oracle::dense(f);
  REQUIRE(got.v.size() == d.v.size());
  for (std::size_t k = 0; k < d.v.size(); ++k)
    CHECK(std::abs(got.v[k] - d.v[k]) <= tol * std::max(1.0, std::abs(d.v[k])));
}

}  // namespace

TEST_CASE("flat index round trip") {
  for (Index modes : {1u, 3u, 50u})
    for (Index k = 1; k <= 7; ++k)
      for (Index m = 1; m <= modes; ++m) {
        const Index i = flat_index(k, m, modes);
        CHECK(i >= 1);
        CHECK(split_index(i, modes) == std::make_pair(k, m));
      }
  CHECK(flat_index(1, 1, 5) == 1);
  CHECK(flat_index(2, 1, 5) == 6);
  CHECK_THROWS_AS(flat_index(1, 6, 5), DomainError);
  CHECK_THROWS_AS(flat_index(0, 1, 5), DomainError);
}

TEST_CASE("arrangement counts") {
  const std::vector<Index> a{1, 1, 2, 3}, b{4, 4, 4}, c{1, 2, 3};
  CHECK(arrangement_count(a) == 12.0);
  CHECK(arrangement_count(b) == 1.0);
  CHECK(arrangement_count(c) == 6.0);
}

TEST_CASE("builder sums duplicates and drops zeros") {
  KernelBuilder b(2, 3, false);
  const std::vector<Index> t{1, 2}, u{2, 1};
  b.add(t, 1.5);
  b.add(t, -1.5);
  b.add(u, 2.0);
  const ScalarKernel k = b.build();
  CHECK(k.size() == 1);
  CHECK(k.coeff(u) == 2.0);
  CHECK(k.coeff(t) == 0.0);
  CHECK_THROWS_AS(b.add(std::vector<Index>{1, 4}, 1.0), DomainError);
  CHECK_THROWS_AS(b.add(std::vector<Index>{1}, 1.0), DomainError);
}

TEST_CASE("symmetrize matches dense averaging, is idempotent and shrinks the norm") {
  GaussianStream rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 1 + trial % 4;
    const Index n = 2 + static_cast<Index>(trial % 5);
    const ScalarKernel f = random_general(p, n, 5, rng);
    const ScalarKernel s = symmetrize(f);
    CHECK(s.is_symmetric());
    check_dense_equal(s, oracle::symmetrized(oracle::dense(f)), 1e-13);
    CHECK(hs_norm(s) <= hs_norm(f) * (1 + 1e-14));
    const ScalarKernel ss = symmetrize(s);
    REQUIRE(ss.size() == s.size());
    for (std::size_t e = 0; e < s.size(); ++e) CHECK(ss.value(e) == s.value(e));
    // every permutation of a stored tuple reads the same coefficient
    for (std::size_t e = 0; e < s.size(); ++e) {
      std::vector<Index> t(s.indices(e).begin(), s.indices(e).end());
      do CHECK(s.coeff(t) == s.value(e));
      while (std::next_permutation(t.begin(), t.end()));
    }
  }
}

TEST_CASE("contractions agree with dense contraction and obey the norm inequality") {
  GaussianStream rng(12);
  for (int trial = 0; trial < 60; ++trial) {
    const int p = 1 + trial % 4, q = 1 + (trial / 4) % 4;
    const Index n = 2 + static_cast<Index>(trial % 5);
    const ScalarKernel f = random_general(p, n, 4, rng);
    const ScalarKernel g = random_symmetric_kernel(q, n, 4, rng);
    for (int r = 0; r <= std::min(p, q); ++r) {
      const ScalarKernel c = contract_scalar(f, g, r);
      CHECK(c.order() == p + q - 2 * r);
      check_dense_equal(c, oracle::contract(oracle::dense(f), oracle::dense(g), r), 1e-12);
      CHECK(hs_norm(c) <= hs_norm(f) * hs_norm(g) * (1 + 1e-12));
    }
  }
}

TEST_CASE("full contraction is the inner product") {
  GaussianStream rng(13);
  for (int p = 1; p <= 4; ++p) {
    const ScalarKernel f = random_symmetric_kernel(p, 5, 8, rng);
    const ScalarKernel g = random_symmetric_kernel(p, 5, 8, rng);
    const ScalarKernel c = contract_scalar(f, g, p);
    REQUIRE(c.order() == 0);
    const double ip = hs_inner(f, g);
    const double value = c.empty() ? 0.0 : c.value(0);
    CHECK(value == doctest::Approx(ip).epsilon(1e-13));
    CHECK(hs_inner(f, f) == doctest::Approx(hs_norm(f) * hs_norm(f)).epsilon(1e-13));
    const oracle::Dense df = oracle::dense(f);
    CHECK(hs_norm(f) == doctest::Approx(oracle::hs(df)).epsilon(1e-13));
  }
}

TEST_CASE("add_kernels and scaled are linear") {
  GaussianStream rng(14);
  const ScalarKernel f = random_symmetric_kernel(3, 4, 6, rng);
  const ScalarKernel g = random_symmetric_kernel(3, 4, 6, rng);
  const ScalarKernel h = add_kernels(f, g, 2.0, -0.5);
  oracle::Dense expect = oracle::dense(f);
  const oracle::Dense dg = oracle::dense(g);
  for (std::size_t k = 0; k < expect.v.size(); ++k) expect.v[k] = 2.0 * expect.v[k] - 0.5 * dg.v[k];
  check_dense_equal(h, expect, 1e-14);
  CHECK(hs_norm(f.scaled(-3.0)) == doctest::Approx(3.0 * hs_norm(f)).epsilon(1e-14));
  CHECK(add_kernels(f, f, 1.0, -1.0).empty());
}

TEST_CASE("projective_norm_upper is subadditive and homogeneous") {
  GaussianStream rng(15);
  const PathVector grid = PathVector::zero(1.0, 8);
  auto random_path = [&] {
    std::vector<double> v(9);
    rng.fill(v);
    return PathVector(1.0, 8, 1, v);
  };
  for (int trial = 0; trial < 20; ++trial) {
    VectorKernel f(2, 4, grid), g(2, 4, grid);
    for (int j = 0; j < 3; ++j) {
      f.add_term(random_symmetric_kernel(2, 4, 3, rng), random_path());
      g.add_term(random_symmetric_kernel(2, 4, 3, rng), random_path());
    }
    const VectorTensorKernel u = contract_vector(f, g, 1);
    const VectorTensorKernel w = contract_vector(g, f, 1);
    VectorTensorKernel both = u;
    both.append(w);
    CHECK(projective_norm_upper(both) <=
          projective_norm_upper(u) + projective_norm_upper(w) + 1e-12);
    CHECK(projective_norm_upper(u.scaled(-2.5)) ==
          doctest::Approx(2.5 * projective_norm_upper(u)).epsilon(1e-13));
    CHECK(projective_norm_upper(u) >= 0.0);
  }
}

TEST_CASE("contract_vector selections agree on nonzero terms") {
  GaussianStream rng(16);
  const PathVector grid = PathVector::zero(1.0, 4);
  VectorKernel f(2, 6, grid);
  for (Index i = 1; i <= 4; ++i)
    f.add_term(ScalarKernel::basis_power(i, 2, 6, rng()), PathVector::from_function(1.0, 4, [&](double t) {
                 return std::sin(i * t);
               }));
  const auto all = contract_vector(f, f, 1, TermSelection::all);
  const auto overlapping = contract_vector(f, f, 1, TermSelection::overlapping);
  CHECK(all.size() == 16);
  CHECK(overlapping.size() == 4);
  CHECK(projective_norm_upper(all) == doctest::Approx(projective_norm_upper(overlapping)).epsilon(1e-14));
}

TEST_CASE("merged keeps the represented element") {
  const PathVector x = PathVector::from_function(1.0, 4, [](double t) { return t; });
  const PathVector y = PathVector::from_function(1.0, 4, [](double t) { return 1 - t; });
  VectorKernel f(1, 3, x);
  f.add_term(ScalarKernel::basis_power(1, 1, 3), x);
  f.add_term(ScalarKernel::basis_power(2, 1, 3), y);
  f.add_term(ScalarKernel::basis_power(1, 1, 3, 2.0), x);
  const VectorKernel m = f.merged();
  REQUIRE(m.size() == 2);
  const std::vector<Index> one{1};
  CHECK(m.terms()[0].kernel.coeff(one) == 3.0);
  CHECK(m.nuclear_bound() <= f.nuclear_bound());
}

TEST_CASE("gamma norm of a rank-one first-order kernel") {
  // ||xi x||_{L2} = ||x||_inf for a single standard normal
  const PathVector x = PathVector::from_function(1.0, 10, [](double t) { return 1.0 + t; });
  VectorKernel f(1, 1, x);
  f.add_term(ScalarKernel::basis_power(1, 1, 1), x);
  const McEstimate est = gamma_norm_mc(f, 40000, 3);
  CHECK(std::abs(est.estimate - 2.0) <= 3 * est.standard_error);
  const McEstimate again = gamma_norm_mc(f, 40000, 3);
  CHECK(again.estimate == est.estimate);
}

TEST_CASE("kernel JSON round trip") {
  GaussianStream rng(17);
  const PathVector grid = PathVector::zero(2.0, 5);
  VectorKernel f(3, 4, grid);
  for (int j = 0; j < 3; ++j) {
    std::vector<double> v(6);
    rng.fill(v);
    f.add_term(random_symmetric_kernel(3, 4, 5, rng), PathVector(2.0, 5, 1, v));
  }
  const auto file = std::filesystem::temp_directory_path() / "chaosbound_kernel_roundtrip.json";
  write_kernel(f, file);
  const VectorKernel g = read_kernel(file);
  std::filesystem::remove(file);
  REQUIRE(g.size() == f.size());
  CHECK(g.order() == 3);
  CHECK(g.truncation() == 4);
  for (std::size_t j = 0; j < f.size(); ++j) {
    CHECK(g.terms()[j].kernel.is_symmetric());
    CHECK(g.terms()[j].path == f.terms()[j].path);
    check_dense_equal(g.terms()[j].kernel, oracle::dense(f.terms()[j].kernel), 0.0);
  }
  const auto j = kernel_to_json(f);
  CHECK(j.contains("order"));
  CHECK(j.contains("truncation"));
  CHECK(j["terms"][0].contains("coeffs"));
  CHECK(j["terms"][0]["path"].contains("T"));

  auto bad = j;
  bad["terms"][0]["coeffs"][0][0] = 9;
  CHECK_THROWS_AS(kernel_from_json(bad), DomainError);
}

TEST_CASE("general kernels survive serialization unchanged") {
  GaussianStream rng(18);
  const PathVector grid = PathVector::zero(1.0, 2);
  VectorKernel f(2, 3, grid);
  f.add_term(random_general(2, 3, 4, rng), PathVector::from_function(1.0, 2, [](double t) { return t; }));
  const VectorKernel g = kernel_from_json(kernel_to_json(f));
  check_dense_equal(g.terms()[0].kernel, oracle::dense(f.terms()[0].kernel), 0.0);
}
