#pragma once

// Uniform-grid samples of continuous functions [0,T] -> R^d.

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace chaosbound {

// Values are stored row-major, (steps + 1) nodes by dim components, in
// immutable shared storage so that copies are cheap. steps == 0 denotes a
// single point of R^d (used for finite-dimensional empirical measures).
class PathVector {
 public:
  PathVector(double horizon, std::size_t steps, std::size_t dim, std::vector<double> values);

  static PathVector zero(double horizon, std::size_t steps, std::size_t dim = 1);
  static PathVector from_function(double horizon, std::size_t steps,
                                  const std::function<double(double)>& fn);
  static PathVector point(std::vector<double> coords);

  double horizon() const { return horizon_; }
  std::size_t steps() const { return steps_; }
  std::size_t dim() const { return dim_; }
  std::size_t nodes() const { return steps_ + 1; }
  double step_size() const { return steps_ == 0 ? 0.0 : horizon_ / static_cast<double>(steps_); }
  double time(std::size_t node) const;

  std::span<const double> values() const { return *values_; }
  double at(std::size_t node, std::size_t component = 0) const {
    return (*values_)[node * dim_ + component];
  }

  // max over grid nodes of the Euclidean norm in R^d
  double sup_norm() const;

  bool same_grid(const PathVector& other) const;
  bool shares_storage(const PathVector& other) const { return values_ == other.values_; }

  PathVector scaled(double factor) const;

  friend bool operator==(const PathVector& a, const PathVector& b);

 private:
  double horizon_;
  std::size_t steps_;
  std::size_t dim_;
  std::shared_ptr<const std::vector<double>> values_;
};

// Sup-norm distance between two paths on the same grid.
double sup_distance(const PathVector& a, const PathVector& b);

// Mutable accumulation buffer producing a PathVector.
class PathAccumulator {
 public:
  PathAccumulator(double horizon, std::size_t steps, std::size_t dim = 1);
  explicit PathAccumulator(const PathVector& like)
      : PathAccumulator(like.horizon(), like.steps(), like.dim()) {}

  void add_scaled(double factor, const PathVector& path);  // buffer += factor * path
  void reset();
  std::span<const double> values() const { return buffer_; }
  double sup_norm() const;
  PathVector finish() const;

 private:
  double horizon_;
  std::size_t steps_;
  std::size_t dim_;
  std::vector<double> buffer_;
};

}  // namespace chaosbound
