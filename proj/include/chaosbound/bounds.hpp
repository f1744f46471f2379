#pragma once

// Explicit bounded-Lipschitz distance bounds, packaged as certificates that
// record every input and intermediate term and can be re-derived on load.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "chaosbound/kernels.hpp"
#include "chaosbound/random.hpp"

namespace chaosbound {

// E sup_{t in [0,1]} |B_t| for d-dimensional Brownian motion, sampled on
// `steps` grid intervals. The grid maximum underestimates the continuous
// one by O(sqrt(1/steps)).
McEstimate estimate_sd(std::size_t d, std::size_t samples, std::size_t steps, std::uint64_t seed);

// 3/2 * cbrt(4 (T + 2)(sqrt(T) s_d + sqrt(d)))
double c_td(double horizon, double d, double s_d);

enum class Provenance {
  formula,    // closed-form expression evaluated verbatim
  derived,    // composed or re-derived from other results
  estimated,  // Monte Carlo input
};

const char* provenance_name(Provenance p);

struct CertificateTerm {
  std::string name;
  double value;
  Provenance provenance;
};

struct BoundCertificate {
  std::string bound_name;
  nlohmann::json inputs = nlohmann::json::object();
  std::vector<CertificateTerm> terms;
  double total = 0.0;
  std::string paper_ref;
  std::string composition;  // how the total is assembled from the terms

  double term(const std::string& name) const;
};

nlohmann::json to_json(const BoundCertificate& c);

// Parses and re-derives the certificate from its inputs; throws DomainError
// when the recorded terms or total disagree with the recomputation.
BoundCertificate certificate_from_json(const nlohmann::json& j);

// Rebuilds a certificate of the same bound_name from its recorded inputs.
BoundCertificate recompute(const BoundCertificate& c);
bool verify_certificate(const BoundCertificate& c, double rel_tol = 1e-12);

// reg_x + reg_z + c_td * eps^{-2/3} * deviation^{1/3}
BoundCertificate dbl_bound_regularized(double reg_x, double reg_z, double deviation,
                                       double epsilon, double horizon, double d, double s_d);

enum class HolderMode {
  optimized,  // exact minimum over eps of the regularized bound
  printed,    // M(2+3a) / (2 (M a)^{3a/(3a+2)}) * (K D)^{a/(a+2/3)}
};

// Minimizes 2 M eps^alpha + c_td eps^{-2/3} D^{1/3} over eps > 0. With
// K = 4 (T + 2)(sqrt(T) s_d + sqrt(d)) the minimum is
// M (2 + 3 alpha) (2 M alpha)^{-3 alpha/(3 alpha + 2)} (K D)^{alpha/(3 alpha + 2)}.
BoundCertificate dbl_bound_holder(double gap_constant, double alpha, double horizon, double d,
                                  double s_d, double deviation,
                                  HolderMode mode = HolderMode::optimized);

// Minimizer eps* of the optimized Hoelder bound.
double holder_optimal_epsilon(double gap_constant, double alpha, double horizon, double d,
                              double s_d, double deviation);

struct ContractionRateInputs {
  double beta;
  double gap_constant;  // M in the regularization gap model M eps^beta
  double horizon;
  double d;
  double s_d;
  int p;
  double trace_deviation;                // ||R_F - R_Z||_trace
  std::vector<double> contraction_norms; // r = 1..p-1
};

// C (||R_F - R_Z||^a + sum_r (w_r ||f (x)~_r f||)^a), a = beta / (3 beta + 2),
// where w_r = a_{p,p,r} sqrt((2p-2r)!) / p and C is the optimized Hoelder
// constant at exponent beta.
BoundCertificate contraction_rate_certificate(const ContractionRateInputs& in);

BoundCertificate dbl_contraction_rate_bound(const VectorKernel& f, const Eigen::MatrixXd& r_f,
                                            const Eigen::MatrixXd& r_z, double beta,
                                            double gap_constant, double horizon, double d,
                                            double s_d);

// 1/2 * deviation
double rho_inf_bound(double deviation);

// 1/2 ||R_F - R_Z||_trace + (1/2p) sum_r sqrt((2p-2r)!) a_{p,p,r} ||f (x)~_r f||
BoundCertificate hilbert_contraction_certificate(int p, double trace_deviation,
                                                 const std::vector<double>& contraction_norms);
BoundCertificate hilbert_contraction_bound(const VectorKernel& f, const Eigen::MatrixXd& r_f,
                                           const Eigen::MatrixXd& r_z);

// ||f (x)~_{r,pi} f||_upper for r = 1..p-1.
std::vector<double> self_contraction_norms(const VectorKernel& f);

// d_BL in [low, high] => d_LP in [low / 2, 3 high / 2].
std::pair<double, double> lp_bl_convert(double d_bl_low, double d_bl_high);

}  // namespace chaosbound
