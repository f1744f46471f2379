#pragma once

// Carre du champ of two chaos elements, expanded into contraction integrals,
// and the covariance / deviation quantities built from it.

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "chaosbound/chaos.hpp"
#include "chaosbound/kernels.hpp"

namespace chaosbound {

// p q (r-1)! C(p-1, r-1) C(q-1, r-1), 1 <= r <= min(p, q).
std::uint64_t a_coeff(int p, int q, int r);

struct GammaTerm {
  int r;
  double a;
  VectorTensorKernel kernel;  // f (x)~_{r,pi} g
};

struct GammaDecomposition {
  int p;
  int q;
  std::vector<GammaTerm> terms;  // r = 1..min(p, q)
};

GammaDecomposition gamma_decompose(const VectorKernel& f, const VectorKernel& g,
                                   TermSelection selection = TermSelection::overlapping);

// Grid matrix sum_terms I(c)(draw) * x y^T, rows indexed by x's flattened
// (node, component) pairs.
Eigen::MatrixXd sample_tensor_integral(const VectorTensorKernel& u, const GaussianDraw& draw);

// sum_r a_r I(f (x)~_r g) on one draw, restricted to r <= max_r.
Eigen::MatrixXd sample_decomposition(const GammaDecomposition& d, const GaussianDraw& draw,
                                     int max_r);

// sum_k D_k I_p(f) (x) D_k I_q(g) on one draw, as a grid matrix.
Eigen::MatrixXd malliavin_gamma_paths(const VectorKernel& f, const VectorKernel& g,
                                      const GaussianDraw& draw);

// Q_{X,Y} for X = I_p(f), Y = I_q(g): an order-0 tensor kernel and the grid
// matrix Cov(X(s), Y(t)). Zero when p != q.
struct CovTensor {
  VectorTensorKernel tensor;
  Eigen::MatrixXd matrix;
};

CovTensor covariance_tensor(const VectorKernel& f, const VectorKernel& g);

// Sum of singular values.
double trace_norm(const Eigen::MatrixXd& m);

enum class DeviationMode { hilbert, generic };

struct DeviationTerm {
  int r;
  double a;
  double c_const;
  double contraction_norm;
  double contribution;
};

struct DeviationReport {
  int p;
  int q;
  std::vector<DeviationTerm> terms;
  double total;
};

// (1/q) sum_{r=1}^{min(p,q)-1} a_{p,q,r} C_{p+q-2r,m} ||f (x)~_{r,pi} g||_upper.
// Hilbert mode uses C_k = sqrt(k!); generic mode the upper isometry constant
// in L^m with Kahane-Khintchine constant kappa.
DeviationReport gamma_deviation_bound(const VectorKernel& f, const VectorKernel& g,
                                      DeviationMode mode = DeviationMode::hilbert,
                                      double kappa = 1.0, double m = 2.0);

nlohmann::json to_json(const DeviationReport& report);

// E || Gamma_pi(X, -L^{-1} X) - Q_X ||_upper for X = I_p(f), sampling the
// non-deterministic decomposition terms on shared draws.
McEstimate gamma_deviation_mc(const VectorKernel& f, std::size_t samples, std::uint64_t seed);

}  // namespace chaosbound
