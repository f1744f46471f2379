#pragma once

// Hermite model: F_n = sum_{k<=n} sum_{m<=M} sqrt(lambda_m / (p! n)) H_p(xi_{k,m}) phi_m,
// a p-th chaos process with the covariance of Brownian motion on [0, T],
// built on the Karhunen-Loeve system of Brownian motion.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "chaosbound/chaos.hpp"
#include "chaosbound/kernels.hpp"
#include "chaosbound/regularization.hpp"

namespace chaosbound {

// lambda_m = T^2 / ((m - 1/2)^2 pi^2), phi_m(t) = sqrt(2/T) sin((m - 1/2) pi t / T).
struct KLSystem {
  double horizon;
  std::vector<double> eigenvalues;
  std::vector<PathVector> eigenfunctions;

  std::size_t modes() const { return eigenvalues.size(); }
};

KLSystem kl_system(double horizon, std::size_t modes, std::size_t steps);

// sum_{m > M} lambda_m = T^2 / pi^2 * trigamma(M + 1/2)
double kl_tail_mass(double horizon, std::size_t modes);

// Truncated KL covariance sum_m lambda_m phi_m(s) phi_m(t) on the grid.
Eigen::MatrixXd kl_covariance(const KLSystem& kl);

struct HermiteModelConfig {
  int p = 2;
  Index n = 16;
  std::size_t modes = 50;
  double horizon = 1.0;
  std::size_t steps = 100;
  double tail_tolerance = 1e-2;  // on sum_{m>M} lambda_m / (T^2 / 2)
  std::uint64_t seed = 1;

  void validate() const;
  Index basis_size() const;
  nlohmann::json to_json() const;
};

// n * M rank-one terms sqrt(lambda_m / (p! n)) h_{k,m}^{(x) p} (x) phi_m, with
// h_{k,m} = e_{(k-1) M + m}.
VectorKernel build_kernel(const HermiteModelConfig& cfg, const KLSystem& kl);
VectorKernel build_kernel(const HermiteModelConfig& cfg);

// F_n evaluated directly from xi_{k,m} = H_p(draw at (k, m)); agrees with
// sample_vector_integral(build_kernel(cfg), draw).
PathVector hermite_path(const HermiteModelConfig& cfg, const KLSystem& kl,
                        const GaussianDraw& draw);

PathSampler hermite_sampler(const HermiteModelConfig& cfg, const KLSystem& kl);

// sum_m sqrt(lambda_m) xi_m phi_m, the KL-truncated Brownian motion.
PathSampler kl_brownian_sampler(const KLSystem& kl);

struct ContractionCheck {
  int r;
  double truncated;   // ||f_n (x)~_r f_n||_upper over the modes m <= M
  double tail;        // closed-form contribution of the modes m > M
  double total;       // truncated + tail
  double squared;     // total^2 = T^2 / (n (p!)^2) in exact arithmetic
  double reference;   // T / (n (p!)^2)
};

std::vector<ContractionCheck> contraction_bound_check(const HermiteModelConfig& cfg);

struct GridCovariance {
  Eigen::MatrixXd covariance;
  Eigen::MatrixXd standard_error;
  std::size_t samples;
};

// Sample covariance of a path sampler at every pair of grid nodes (d = 1).
GridCovariance grid_covariance_mc(const PathSampler& sampler, std::size_t samples,
                                  std::uint64_t seed);

struct RateRow {
  Index n;
  double deviation_bound;
  double certificate_total;
  double empirical_dbl;
  double noise_floor;
  std::uint64_t seed;
  nlohmann::json certificate;
};

struct RateOptions {
  double beta = 0.5;
  std::size_t empirical_samples = 1000;  // 0 skips the empirical distances
  std::size_t directions = 32;
  std::size_t exact_threshold = 500;     // exact LP up to this many samples per side
  std::size_t sd_samples = 20000;
  std::size_t sd_steps = 1000;
  std::size_t gap_samples = 400;
};

struct RateTable {
  HermiteModelConfig base;
  RateOptions options;
  double s_d;
  double s_d_se;
  double gap_constant;
  std::vector<RateRow> rows;
  double certificate_slope;
  double deviation_slope;
  double empirical_slope;
};

RateTable rate_experiment(const HermiteModelConfig& cfg, const std::vector<Index>& n_list,
                          const RateOptions& options = {});

// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

std::string rate_csv(const RateTable& table);

}  // namespace chaosbound
