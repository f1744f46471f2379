#include "chaosbound/path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaosbound/errors.hpp"
#include "chaosbound/simd.hpp"

namespace chaosbound {
namespace {

double sup_norm_of(std::span<const double> v, std::size_t dim) {
  if (dim == 1) return simd::max_abs(v);
  double best = 0.0;
  for (std::size_t i = 0; i < v.size(); i += dim) {
    double s = 0.0;
    for (std::size_t c = 0; c < dim; ++c) s += v[i + c] * v[i + c];
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

}  // namespace

PathVector::PathVector(double horizon, std::size_t steps, std::size_t dim,
                       std::vector<double> values)
    : horizon_(horizon), steps_(steps), dim_(dim) {
  require(dim >= 1, "path dimension must be positive");
  require(steps == 0 || (std::isfinite(horizon) && horizon > 0.0),
          "path horizon must be positive and finite");
  require(values.size() == (steps + 1) * dim,
          "path values: expected " + std::to_string((steps + 1) * dim) + " entries, got " +
              std::to_string(values.size()));
  for (double v : values) require(std::isfinite(v), "path values must be finite");
  values_ = std::make_shared<const std::vector<double>>(std::move(values));
}

PathVector PathVector::zero(double horizon, std::size_t steps, std::size_t dim) {
  return PathVector(horizon, steps, dim, std::vector<double>((steps + 1) * dim, 0.0));
}

PathVector PathVector::from_function(double horizon, std::size_t steps,
                                     const std::function<double(double)>& fn) {
  require(steps >= 1, "from_function needs at least one grid step");
  std::vector<double> v(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    v[i] = fn(horizon * static_cast<double>(i) / static_cast<double>(steps));
  return PathVector(horizon, steps, 1, std::move(v));
}

PathVector PathVector::point(std::vector<double> coords) {
  const std::size_t d = coords.size();
  return PathVector(0.0, 0, d, std::move(coords));
}

double PathVector::time(std::size_t node) const {
  if (steps_ == 0) return 0.0;
  // exact at both ends
  if (node == steps_) return horizon_;
  return horizon_ * static_cast<double>(node) / static_cast<double>(steps_);
}

double PathVector::sup_norm() const { return sup_norm_of(*values_, dim_); }

bool PathVector::same_grid(const PathVector& other) const {
  return steps_ == other.steps_ && dim_ == other.dim_ && horizon_ == other.horizon_;
}

PathVector PathVector::scaled(double factor) const {
  std::vector<double> v(*values_);
  simd::scale(factor, v);
  return PathVector(horizon_, steps_, dim_, std::move(v));
}

bool operator==(const PathVector& a, const PathVector& b) {
  return a.same_grid(b) && (a.values_ == b.values_ || *a.values_ == *b.values_);
}

double sup_distance(const PathVector& a, const PathVector& b) {
  require(a.same_grid(b), "sup_distance: grid mismatch");
  if (a.dim() == 1) return simd::max_abs_diff(a.values(), b.values());
  const auto x = a.values();
  const auto y = b.values();
  double best = 0.0;
  for (std::size_t i = 0; i < x.size(); i += a.dim()) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.dim(); ++c) s += (x[i + c] - y[i + c]) * (x[i + c] - y[i + c]);
    best = std::max(best, std::sqrt(s));
  }
  return best;
}

PathAccumulator::PathAccumulator(double horizon, std::size_t steps, std::size_t dim)
    : horizon_(horizon), steps_(steps), dim_(dim), buffer_((steps + 1) * dim, 0.0) {}

void PathAccumulator::add_scaled(double factor, const PathVector& path) {
  require(path.steps() == steps_ && path.dim() == dim_ && path.horizon() == horizon_,
          "PathAccumulator: grid mismatch");
  simd::axpy(factor, path.values(), buffer_);
}

void PathAccumulator::reset() { std::fill(buffer_.begin(), buffer_.end(), 0.0); }

double PathAccumulator::sup_norm() const { return sup_norm_of(buffer_, dim_); }

PathVector PathAccumulator::finish() const {
  return PathVector(horizon_, steps_, dim_, buffer_);
}

}  // namespace chaosbound
