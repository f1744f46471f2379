#pragma once

// Bounded-Lipschitz (flat) distance between empirical measures on path
// space, computed as optimal transport with ground cost min(||x - y||_inf, 2).

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "chaosbound/path.hpp"
#include "chaosbound/regularization.hpp"

namespace chaosbound {

// Equally weighted atoms on a common grid.
class EmpiricalMeasure {
 public:
  explicit EmpiricalMeasure(std::vector<PathVector> atoms);
  std::size_t size() const { return atoms_.size(); }
  std::span<const PathVector> atoms() const { return atoms_; }
  const PathVector& operator[](std::size_t i) const { return atoms_[i]; }

 private:
  std::vector<PathVector> atoms_;
};

// Row-major rows x cols matrix of min(sup_distance, 2).
std::vector<double> truncated_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Minimal cost of moving uniform mass 1/rows per row onto uniform mass
// 1/cols per column. Exact (successive shortest paths with integer masses);
// throws SolverError if the final plan fails the optimality check.
double transport_uniform(std::span<const double> cost, std::size_t rows, std::size_t cols);

// Reference value for tiny instances: enumerates every spanning tree of the
// bipartite support graph, solves the tight dual potentials on it and keeps
// the best feasible one. Cost grows combinatorially; rows * cols <= 20.
double transport_by_enumeration(std::span<const double> cost, std::size_t rows, std::size_t cols);

double empirical_dbl(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

// Exact flat distance between two weighted point sets on the real line.
double dbl_1d(std::span<const double> x, std::span<const double> y);

// Coefficients of a 1-Lipschitz linear functional on grid paths:
// sum |coeff| <= 1 over the flattened (node, component) values.
std::vector<double> slice_direction(std::size_t index, std::size_t entries, std::size_t dim,
                                    std::uint64_t seed);

// max over the first K directions of the 1-D flat distance of the projected
// samples. Directions form a fixed sequence per seed, so the value is
// nondecreasing in K; direction 0 evaluates the last grid node.
double sliced_dbl_lower(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                        std::size_t directions, std::uint64_t seed);

enum class DblMethod { exact, sliced };

// N paths drawn with per-path streams derived from seed.
EmpiricalMeasure sample_measure(const PathSampler& sampler, std::size_t count,
                                std::uint64_t seed);

// Flat distance between two independent N-samples of the same law.
double dbl_selfconsistency(const PathSampler& sampler, std::size_t count, std::uint64_t seed,
                           DblMethod method = DblMethod::exact, std::size_t directions = 32);

// One row per path, flattened grid values; a header row names the columns.
void write_samples_csv(const EmpiricalMeasure& m, const std::filesystem::path& file);
EmpiricalMeasure read_samples_csv(const std::filesystem::path& file, double horizon,
                                  std::size_t dim = 1);

}  // namespace chaosbound
