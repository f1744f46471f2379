#pragma once

// Moving-average smoothing of paths with a clamped argument, and the
// Garsia-Rodemich-Rumsey continuity constants that bound its effect.

#include <cstdint>
#include <functional>

#include "chaosbound/path.hpp"
#include "chaosbound/random.hpp"

namespace chaosbound {

// f_eps(x) = (1/2eps) * integral over [x - eps, x + eps] of f([u]), where [u]
// clamps u to [0, T] and f is the piecewise-linear interpolant of the grid
// values. Evaluated exactly at every grid node, componentwise.
PathVector regularize(const PathVector& path, double epsilon);

// sup over |s - t| <= eps of |f(s) - f(t)| for the piecewise-linear
// interpolant (Euclidean norm when d > 1).
double modulus_of_continuity(const PathVector& path, double epsilon);

using PathSampler = std::function<PathVector(GaussianStream&)>;

// Standard Brownian motion on a uniform grid (independent increments).
PathSampler brownian_sampler(double horizon, std::size_t steps, std::size_t dim = 1);

struct RegularizationReport {
  double epsilon = 0.0;
  double mean_sup_gap = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

// Monte Carlo mean of ||X_eps - X||_inf.
RegularizationReport regularization_gap_mc(const PathSampler& sampler, double epsilon,
                                           std::size_t samples, std::uint64_t seed);

enum class GrrMode {
  printed,          // (p-1)^{s/2} hypercontractivity factor
  hypercontractive  // (s-1)^{p/2}
};

// 8 h(p, s) sqrt(p!) (2/(eta s))^{1/s} T^{(1 + eta s)/s}
double grr_constant(int p, double s, double eta, double horizon, GrrMode mode);

// beta - 1/s - eta
double holder_reg_exponent(double beta, double s, double eta);

// grr_constant * L * eps^{beta - 1/s - eta}, for 0 < eta < beta - 1/s.
double holder_reg_bound(double lipschitz, double beta, double s, double eta, double epsilon, int p,
                        double horizon, GrrMode mode);

}  // namespace chaosbound
