#pragma once

// Multiple Wiener-Ito integrals of finite-rank kernels, evaluated exactly on
// a draw of the underlying standard normals.

#include <cstdint>
#include <span>
#include <vector>

#include "chaosbound/kernels.hpp"
#include "chaosbound/path.hpp"
#include "chaosbound/random.hpp"

namespace chaosbound {

// Probabilists' Hermite polynomial He_k: H_0 = 1, H_1 = x,
// H_{k+1} = x H_k - k H_{k-1}.
double hermite(int k, double x);

// xi_i = W(e_i) for i = 1..n, plus the seed it was drawn from.
class GaussianDraw {
 public:
  explicit GaussianDraw(std::vector<double> xi, std::uint64_t seed = 0, std::uint64_t stream = 0);
  static GaussianDraw sample(Index n, std::uint64_t seed, std::uint64_t stream = 0);
  static GaussianDraw sample(Index n, GaussianStream& rng);

  Index size() const { return static_cast<Index>(xi_.size()); }
  std::span<const double> values() const { return xi_; }
  double at(Index i) const { return xi_[i - 1]; }  // 1-based
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::vector<double> xi_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

// H_0..H_max_order evaluated at every coordinate of a draw.
class HermiteTable {
 public:
  HermiteTable(const GaussianDraw& draw, int max_order);
  int max_order() const { return max_order_; }
  Index size() const { return n_; }
  double operator()(Index i, int k) const {
    return table_[(static_cast<std::size_t>(i) - 1) * stride_ + static_cast<std::size_t>(k)];
  }

 private:
  int max_order_;
  Index n_;
  std::size_t stride_;
  std::vector<double> table_;
};

enum class SymmetryPolicy { symmetrize, reject };

// Precompiled I_p(f) for repeated evaluation: every sorted tuple becomes a
// weight coeff * (number of orderings) and its (index, multiplicity) runs.
class ChaosEvaluator {
 public:
  explicit ChaosEvaluator(const ScalarKernel& f,
                          SymmetryPolicy policy = SymmetryPolicy::symmetrize);
  int order() const { return order_; }
  Index truncation() const { return truncation_; }
  double operator()(const HermiteTable& h) const;
  double operator()(const GaussianDraw& draw) const;

 private:
  int order_;
  Index truncation_;
  std::vector<double> weights_;
  std::vector<std::size_t> run_offsets_;
  std::vector<std::pair<Index, int>> runs_;
};

double sample_scalar_integral(const ScalarKernel& f, const GaussianDraw& draw,
                              SymmetryPolicy policy = SymmetryPolicy::symmetrize);

// sum_j I_p(f_j) x_j
PathVector sample_vector_integral(const VectorKernel& f, const GaussianDraw& draw,
                                  SymmetryPolicy policy = SymmetryPolicy::symmetrize);

// D_k I_p(f) = I_{p-1}(component k), k = 1..n (entry k-1). Empty for p = 0.
std::vector<ScalarKernel> malliavin_components(const ScalarKernel& f);

// sum_k D_k I_p(f) * D_k I_q(g) on one draw.
double malliavin_gamma(const ScalarKernel& f, const ScalarKernel& g, const GaussianDraw& draw);

// Sample mean of sum_k D_k I_p(f) D_k I_q(g) over N draws.
McEstimate malliavin_gamma_mc(const ScalarKernel& f, const ScalarKernel& g, std::size_t samples,
                              std::uint64_t seed);

// r! C(p,r) C(q,r)
double product_coefficient(int p, int q, int r);

// |I_p(f) I_q(g) - sum_r r! C(p,r) C(q,r) I_{p+q-2r}(f (x)~_r g)| on one draw.
double product_formula_check(const ScalarKernel& f, const ScalarKernel& g,
                             const GaussianDraw& draw);

// Action of -L^{-1} on the q-th chaos.
double apply_neg_Linv(int q);

enum class IsometryMode { generic, hilbert };

struct IsometryConstants {
  double lower;  // c_{p,s}
  double upper;  // C_{p,s}
};

// Two-sided moment equivalence constants for the p-th chaos in L^s; kappa is
// the Kahane-Khintchine constant kappa_{s,2}. Hilbert mode needs s = 2.
IsometryConstants isometry_constants(int p, double s, double kappa,
                                     IsometryMode mode = IsometryMode::generic);

// p! ||f||_HS^2
double isometry_variance(const ScalarKernel& f);

// Sample variance of I_p(f) over N draws.
McEstimate integral_variance_mc(const ScalarKernel& f, std::size_t samples, std::uint64_t seed);

// Sample covariance of I_p(f) and I_q(g) on shared draws.
McEstimate integral_covariance_mc(const ScalarKernel& f, const ScalarKernel& g,
                                  std::size_t samples, std::uint64_t seed);

}  // namespace chaosbound
