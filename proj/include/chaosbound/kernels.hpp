#pragma once

// Finite-rank symmetric tensor kernels over a truncated orthonormal basis
// e_1..e_n, their contractions, and the norms built on them.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "chaosbound/path.hpp"
#include "chaosbound/random.hpp"

namespace chaosbound {

// 1-based index of a basis vector e_i, 1 <= i <= n.
using Index = std::uint32_t;

// Row-major flattening of a double index (k, m), 1 <= m <= modes:
// i = (k - 1) * modes + m.
Index flat_index(Index k, Index m, Index modes);
std::pair<Index, Index> split_index(Index i, Index modes);

// Number of distinct orderings of a sorted tuple: p! / prod(multiplicity!).
double arrangement_count(std::span<const Index> sorted);

// Sparse order-p coefficient tensor.
//
// A general kernel stores ordered index tuples. A symmetric kernel (the result
// of symmetrize(), or of basis_power()) stores each sorted tuple once
// together with the common value of all its permutations. Entries are kept
// sorted and unique; zero coefficients are dropped.
class ScalarKernel {
 public:
  ScalarKernel(int order, Index truncation);

  using Entry = std::pair<std::vector<Index>, double>;
  static ScalarKernel from_entries(int order, Index truncation, std::span<const Entry> entries);
  // weight * e_i^{(x) order}
  static ScalarKernel basis_power(Index i, int order, Index truncation, double weight = 1.0);
  static ScalarKernel constant(double value, Index truncation);

  int order() const { return order_; }
  Index truncation() const { return truncation_; }
  bool is_symmetric() const { return symmetric_; }
  bool empty() const { return values_.empty(); }
  std::size_t size() const { return values_.size(); }

  std::span<const Index> indices(std::size_t entry) const {
    return {indices_.data() + entry * static_cast<std::size_t>(order_),
            static_cast<std::size_t>(order_)};
  }
  double value(std::size_t entry) const { return values_[entry]; }

  // Coefficient at an ordered tuple.
  double coeff(std::span<const Index> tuple) const;

  // Visits every nonzero coefficient of the full tensor by ordered tuple.
  template <class Fn>
  void for_each_ordered(Fn&& fn) const;

  std::vector<Entry> ordered_entries() const;

  // Sorted set of basis indices appearing in any entry.
  std::vector<Index> support() const;

  ScalarKernel scaled(double factor) const;

 private:
  friend class KernelBuilder;
  int order_;
  Index truncation_;
  bool symmetric_ = false;
  std::vector<Index> indices_;
  std::vector<double> values_;
};

// Accumulates coefficients and emits a ScalarKernel. In symmetric mode keys
// are sorted tuples holding the symmetric entry value.
class KernelBuilder {
 public:
  KernelBuilder(int order, Index truncation, bool symmetric);
  void add(std::span<const Index> tuple, double value);
  // Adds factor * k, which must be symmetric when the builder is.
  void add_kernel(const ScalarKernel& k, double factor = 1.0);
  ScalarKernel build() const;

 private:
  int order_;
  Index truncation_;
  bool symmetric_;
  std::vector<std::pair<std::vector<Index>, double>> pending_;
};

ScalarKernel symmetrize(const ScalarKernel& f);

// f (x)_r g: contracts the last r slots of sym(f) against the first r slots of
// sym(g). Order p + q - 2r; r == p == q yields an order-0 (constant) kernel.
ScalarKernel contract_scalar(const ScalarKernel& f, const ScalarKernel& g, int r);

double hs_inner(const ScalarKernel& f, const ScalarKernel& g);
double hs_norm(const ScalarKernel& f);

// Symmetric kernel with up to `entries` random sorted tuples and standard
// normal coefficients.
ScalarKernel random_symmetric_kernel(int order, Index truncation, std::size_t entries,
                                     GaussianStream& rng);

ScalarKernel add_kernels(const ScalarKernel& f, const ScalarKernel& g, double alpha = 1.0,
                         double beta = 1.0);

struct KernelTerm {
  ScalarKernel kernel;
  PathVector path;
};

// Nuclear series sum_j f_j (x) x_j with scalar kernels of a common order and
// truncation and paths on a common grid.
class VectorKernel {
 public:
  VectorKernel(int order, Index truncation, const PathVector& grid_like);

  void add_term(ScalarKernel kernel, PathVector path);

  int order() const { return order_; }
  Index truncation() const { return truncation_; }
  const PathVector& grid() const { return grid_; }
  std::span<const KernelTerm> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  // sum_j ||f_j||_HS ||x_j||_inf
  double nuclear_bound() const;

  // Terms sharing an identical path are summed into one; the paths keep their
  // first-appearance order. The represented element is unchanged.
  VectorKernel merged() const;
  VectorKernel symmetrized() const;

 private:
  int order_;
  Index truncation_;
  PathVector grid_;
  std::vector<KernelTerm> terms_;
};

struct TensorTerm {
  ScalarKernel kernel;
  PathVector left;
  PathVector right;
};

// sum_jk c_jk (x) x_j (x) y_k, the tensor-valued contraction of two nuclear
// series.
class VectorTensorKernel {
 public:
  VectorTensorKernel(int order, Index truncation, const PathVector& grid_like);

  void add_term(ScalarKernel kernel, PathVector left, PathVector right);

  int order() const { return order_; }
  Index truncation() const { return truncation_; }
  const PathVector& grid() const { return grid_; }
  std::span<const TensorTerm> terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  VectorTensorKernel merged() const;
  VectorTensorKernel symmetrized() const;
  VectorTensorKernel scaled(double factor) const;

  // Appends all terms of other (same order, truncation and grid).
  void append(const VectorTensorKernel& other);

 private:
  int order_;
  Index truncation_;
  PathVector grid_;
  std::vector<TensorTerm> terms_;
};

enum class TermSelection {
  all,          // every pair (j, k), including identically zero contractions
  overlapping,  // only pairs whose index supports intersect
};

// Termwise contraction (f_j (x)_r g_k, x_j, y_k), 1 <= r <= min(p, q).
VectorTensorKernel contract_vector(const VectorKernel& f, const VectorKernel& g, int r,
                                   TermSelection selection = TermSelection::all);

// Upper bound on the gamma-norm of a tensor-valued kernel:
// sum over terms of ||c||_HS ||x||_inf ||y||_inf, evaluated after merging
// terms that share the same path pair.
double projective_norm_upper(const VectorTensorKernel& u);

// Monte Carlo estimate of ||f||_{gamma^p} = E(||sum_i W_i x_i||_inf^2)^{1/2}
// where W_i is a product of p independent Gaussian vectors.
McEstimate gamma_norm_mc(const VectorKernel& f, std::size_t samples, std::uint64_t seed);

template <class Fn>
void ScalarKernel::for_each_ordered(Fn&& fn) const {
  const std::size_t p = static_cast<std::size_t>(order_);
  std::vector<Index> t(p);
  for (std::size_t e = 0; e < values_.size(); ++e) {
    auto src = indices(e);
    t.assign(src.begin(), src.end());
    if (!symmetric_) {
      fn(std::span<const Index>(t), values_[e]);
      continue;
    }
    do {
      fn(std::span<const Index>(t), values_[e]);
    } while (std::next_permutation(t.begin(), t.end()));
  }
}

}  // namespace chaosbound
