#pragma once

// Seeded randomness and Monte Carlo bookkeeping.
//
// Every estimator takes a master seed. Work is cut into fixed-size chunks and
// chunk c draws from its own engine seeded with derive_seed(seed, c), so the
// result does not depend on how many worker threads run the chunks.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace chaosbound {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed, std::uint64_t stream = 0)
      : engine_(derive_seed(seed, stream)) {}

  double operator()() { return normal_(engine_); }
  void fill(std::span<double> out) {
    for (double& v : out) v = normal_(engine_);
  }
  double uniform() { return uniform_(engine_); }
  Engine& engine() { return engine_; }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

struct McEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

// Streaming mean/variance (Welford), mergeable in a fixed order.
class RunningStats {
 public:
  void push(double x);
  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // unbiased sample variance
  double standard_error() const;
  McEstimate summary() const { return {mean(), standard_error(), count()}; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Sample variance of `xs` with its standard error
// sqrt((m4 - s^4) / N), where m4 is the fourth central moment.
McEstimate sample_variance(std::span<const double> xs);

// Sample covariance of paired draws with standard error sqrt(Var((x-mx)(y-my)) / N).
McEstimate sample_covariance(std::span<const double> xs, std::span<const double> ys);

inline constexpr std::size_t kDefaultChunk = 4096;

// Runs body(chunk_index, begin, end) over [0, total) split into chunks of
// `chunk` items, fanning chunks out across hardware threads.
void parallel_chunks(std::size_t total, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& body);

inline std::size_t chunk_count(std::size_t total, std::size_t chunk) {
  return (total + chunk - 1) / chunk;
}

}  // namespace chaosbound
