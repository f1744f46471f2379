#include "chaosbound/regularization.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "chaosbound/errors.hpp"

namespace chaosbound {
namespace {

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

// Piecewise-linear interpolant of one component at time u in [0, T].
double interpolate(const PathVector& path, std::size_t c, double u) {
  const std::size_t g = path.steps();
  const double h = path.step_size();
  if (u <= 0.0) return path.at(0, c);
  if (u >= path.horizon()) return path.at(g, c);
  std::size_t i = std::min(g - 1, static_cast<std::size_t>(u / h));
  const double a = path.time(i);
  const double b = path.time(i + 1);
  const double w = (u - a) / (b - a);
  return path.at(i, c) + w * (path.at(i + 1, c) - path.at(i, c));
}

// Antiderivative of g = f - f(0) for one component, with g extended as a
// constant outside [0, T]. Measuring from f(0) keeps constant paths exact.
class Antiderivative {
 public:
  Antiderivative(const PathVector& path, std::size_t c) : path_(path), c_(c) {
    const std::size_t g = path.steps();
    nodes_.assign(g + 1, 0.0);
    for (std::size_t i = 0; i < g; ++i)
      nodes_[i + 1] = nodes_[i] + 0.5 * (path.time(i + 1) - path.time(i)) * (rel(i) + rel(i + 1));
  }

  double operator()(double u) const {
    const std::size_t g = path_.steps();
    if (u <= 0.0) return 0.0;
    if (u >= path_.horizon()) return nodes_[g] + (u - path_.horizon()) * rel(g);
    std::size_t i = std::min(g - 1, static_cast<std::size_t>(u / path_.step_size()));
    while (i > 0 && path_.time(i) > u) --i;
    while (i + 1 < g && path_.time(i + 1) <= u) ++i;
    const double a = path_.time(i);
    const double fu = rel(i) + (u - a) / (path_.time(i + 1) - a) * (rel(i + 1) - rel(i));
    return nodes_[i] + 0.5 * (u - a) * (rel(i) + fu);
  }

  double rel(std::size_t node) const { return path_.at(node, c_) - path_.at(0, c_); }

 private:
  const PathVector& path_;
  std::size_t c_;
  std::vector<double> nodes_;
};

}  // namespace

PathVector regularize(const PathVector& path, double epsilon) {
  require(std::isfinite(epsilon) && epsilon > 0.0, "regularize: epsilon must be positive");
  require(path.steps() >= 1, "regularize: path needs at least one grid step");
  const std::size_t d = path.dim();
  std::vector<double> out(path.values().size());
  for (std::size_t c = 0; c < d; ++c) {
    const Antiderivative prim(path, c);
    for (std::size_t node = 0; node <= path.steps(); ++node) {
      const double x = path.time(node);
      const double excess = prim(x + epsilon) - prim(x - epsilon) - 2.0 * epsilon * prim.rel(node);
      out[node * d + c] = path.at(node, c) + excess / (2.0 * epsilon);
    }
  }
  return PathVector(path.horizon(), path.steps(), d, std::move(out));
}

double modulus_of_continuity(const PathVector& path, double epsilon) {
  require(epsilon >= 0.0, "modulus_of_continuity: epsilon must be nonnegative");
  require(path.steps() >= 1, "modulus_of_continuity: path needs at least one grid step");
  const std::size_t d = path.dim();
  const std::size_t g = path.steps();
  auto dist = [&](auto&& left, auto&& right) {
    double s = 0.0;
    for (std::size_t c = 0; c < d; ++c) s += (left(c) - right(c)) * (left(c) - right(c));
    return d == 1 ? std::abs(left(0) - right(0)) : std::sqrt(s);
  };
  // |f(s) - f(t)| is linear on each cell cut out of the band |s - t| <= eps by
  // the grid lines, so the supremum sits on a cell vertex.
  double best = 0.0;
  for (std::size_t i = 0; i <= g; ++i) {
    const double ti = path.time(i);
    auto fi = [&](std::size_t c) { return path.at(i, c); };
    for (std::size_t j = i + 1; j <= g && path.time(j) - ti <= epsilon; ++j)
      best = std::max(best, dist(fi, [&](std::size_t c) { return path.at(j, c); }));
    for (double u : {ti - epsilon, ti + epsilon}) {
      if (u < 0.0 || u > path.horizon()) continue;
      best = std::max(best, dist(fi, [&](std::size_t c) { return interpolate(path, c, u); }));
    }
  }
  return best;
}

PathSampler brownian_sampler(double horizon, std::size_t steps, std::size_t dim) {
  require(horizon > 0.0 && steps >= 1 && dim >= 1, "brownian_sampler: bad grid");
  return [=](GaussianStream& rng) {
    const double sd = std::sqrt(horizon / static_cast<double>(steps));
    std::vector<double> v((steps + 1) * dim, 0.0);
    for (std::size_t i = 1; i <= steps; ++i)
      for (std::size_t c = 0; c < dim; ++c) v[i * dim + c] = v[(i - 1) * dim + c] + sd * rng();
    return PathVector(horizon, steps, dim, std::move(v));
  };
}

RegularizationReport regularization_gap_mc(const PathSampler& sampler, double epsilon,
                                           std::size_t samples, std::uint64_t seed) {
  require(samples >= 1, "regularization_gap_mc: need at least one sample");
  require(epsilon > 0.0, "regularization_gap_mc: epsilon must be positive");
  const std::size_t chunk = 256;
  std::vector<RunningStats> stats(chunk_count(samples, chunk));
  parallel_chunks(samples, chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    for (std::size_t s = begin; s < end; ++s) {
      const PathVector x = sampler(rng);
      stats[c].push(sup_distance(regularize(x, epsilon), x));
    }
  });
  RunningStats all;
  for (const auto& s : stats) all.merge(s);
  return {epsilon, all.mean(), all.standard_error(), samples};
}

double grr_constant(int p, double s, double eta, double horizon, GrrMode mode) {
  require(p >= 1, "grr_constant: chaos order must be positive");
  require(s > 2.0, "grr_constant: s must exceed 2");
  require(eta > 0.0, "grr_constant: eta must be positive");
  require(horizon > 0.0, "grr_constant: T must be positive");
  const double hyper = mode == GrrMode::printed ? std::pow(p - 1.0, s / 2.0)
                                              : std::pow(s - 1.0, p / 2.0);
  return 8.0 * hyper * std::sqrt(factorial(p)) * std::pow(2.0 / (eta * s), 1.0 / s) *
         std::pow(horizon, (1.0 + eta * s) / s);
}

double holder_reg_exponent(double beta, double s, double eta) { return beta - 1.0 / s - eta; }

double holder_reg_bound(double lipschitz, double beta, double s, double eta, double epsilon, int p,
                        double horizon, GrrMode mode) {
  require(beta > 0.0 && beta <= 1.0, "holder_reg_bound: beta must lie in (0, 1]");
  require(s > std::max(2.0, 1.0 / beta), "holder_reg_bound: need s > max(2, 1/beta)");
  require(eta > 0.0 && eta < beta - 1.0 / s, "holder_reg_bound: need 0 < eta < beta - 1/s");
  require(epsilon > 0.0, "holder_reg_bound: epsilon must be positive");
  require(lipschitz >= 0.0, "holder_reg_bound: Lipschitz constant must be nonnegative");
  return grr_constant(p, s, eta, horizon, mode) * lipschitz *
         std::pow(epsilon, holder_reg_exponent(beta, s, eta));
}

}  // namespace chaosbound
