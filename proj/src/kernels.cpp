#include "chaosbound/kernels.hpp"

#include <cmath>
#include <cstring>
#include <map>
#include <string>
#include <unordered_map>

#include "chaosbound/errors.hpp"

namespace chaosbound {
namespace {

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

void check_tuple(std::span<const Index> t, Index n) {
  for (Index i : t)
    if (i < 1 || i > n)
      throw DomainError("basis index " + std::to_string(i) + " outside [1, " +
                        std::to_string(n) + "]");
}

std::size_t hash_path(const PathVector& p) {
  std::size_t h = std::hash<std::size_t>{}(p.steps() * 31 + p.dim());
  for (double v : p.values()) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h ^= std::hash<std::uint64_t>{}(bits) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

// Assigns stable ids to distinct paths in first-appearance order.
class PathRegistry {
 public:
  std::size_t id_of(const PathVector& p) {
    const std::size_t h = hash_path(p);
    auto& bucket = by_hash_[h];
    for (std::size_t id : bucket)
      if (paths_[id] == p) return id;
    bucket.push_back(paths_.size());
    paths_.push_back(p);
    return paths_.size() - 1;
  }
  const PathVector& path(std::size_t id) const { return paths_[id]; }

 private:
  std::vector<PathVector> paths_;
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_hash_;
};

void check_same_space(int order_a, Index n_a, const PathVector& grid_a, int order_b, Index n_b,
                      const PathVector& grid_b, const char* what) {
  (void)order_a;
  (void)order_b;
  require(n_a == n_b, std::string(what) + ": truncation mismatch");
  require(grid_a.same_grid(grid_b), std::string(what) + ": grid mismatch");
}

}  // namespace

Index flat_index(Index k, Index m, Index modes) {
  require(k >= 1 && m >= 1 && m <= modes, "flat_index: double index out of range");
  const std::uint64_t i = static_cast<std::uint64_t>(k - 1) * modes + m;
  require(i <= 0xffffffffULL, "flat_index: basis size overflow");
  return static_cast<Index>(i);
}

std::pair<Index, Index> split_index(Index i, Index modes) {
  require(i >= 1 && modes >= 1, "split_index: index out of range");
  return {(i - 1) / modes + 1, (i - 1) % modes + 1};
}

double arrangement_count(std::span<const Index> sorted) {
  double count = factorial(static_cast<int>(sorted.size()));
  std::size_t run = 1;
  for (std::size_t i = 1; i <= sorted.size(); ++i) {
    if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      count /= factorial(static_cast<int>(run));
      run = 1;
    }
  }
  return count;
}

// ---------------------------------------------------------------- ScalarKernel

ScalarKernel::ScalarKernel(int order, Index truncation)
    : order_(order), truncation_(truncation), symmetric_(order <= 1) {
  require(order >= 0, "kernel order must be nonnegative");
  require(truncation >= 1, "kernel truncation must be positive");
}

ScalarKernel ScalarKernel::from_entries(int order, Index truncation,
                                        std::span<const Entry> entries) {
  KernelBuilder b(order, truncation, false);
  for (const auto& [tuple, value] : entries) b.add(tuple, value);
  return b.build();
}

ScalarKernel ScalarKernel::basis_power(Index i, int order, Index truncation, double weight) {
  KernelBuilder b(order, truncation, true);
  std::vector<Index> t(static_cast<std::size_t>(order), i);
  b.add(t, weight);
  return b.build();
}

ScalarKernel ScalarKernel::constant(double value, Index truncation) {
  KernelBuilder b(0, truncation, true);
  b.add({}, value);
  return b.build();
}

double ScalarKernel::coeff(std::span<const Index> tuple) const {
  require(tuple.size() == static_cast<std::size_t>(order_), "coeff: tuple length != order");
  std::vector<Index> key(tuple.begin(), tuple.end());
  if (symmetric_) std::sort(key.begin(), key.end());
  const std::size_t p = key.size();
  std::size_t lo = 0, hi = values_.size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    auto t = indices(mid);
    if (std::lexicographical_compare(t.begin(), t.end(), key.begin(), key.end()))
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo < values_.size() && std::equal(key.begin(), key.end(), indices_.begin() + lo * p))
    return values_[lo];
  return 0.0;
}

std::vector<ScalarKernel::Entry> ScalarKernel::ordered_entries() const {
  std::vector<Entry> out;
  for_each_ordered([&](std::span<const Index> t, double v) {
    out.emplace_back(std::vector<Index>(t.begin(), t.end()), v);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> ScalarKernel::support() const {
  std::vector<Index> s(indices_);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

ScalarKernel ScalarKernel::scaled(double factor) const {
  ScalarKernel k = *this;
  if (factor == 0.0) {
    k.indices_.clear();
    k.values_.clear();
    return k;
  }
  for (double& v : k.values_) v *= factor;
  return k;
}

// ---------------------------------------------------------------- KernelBuilder

KernelBuilder::KernelBuilder(int order, Index truncation, bool symmetric)
    : order_(order), truncation_(truncation), symmetric_(symmetric || order <= 1) {
  require(order >= 0, "kernel order must be nonnegative");
  require(truncation >= 1, "kernel truncation must be positive");
}

void KernelBuilder::add(std::span<const Index> tuple, double value) {
  require(tuple.size() == static_cast<std::size_t>(order_), "kernel entry length != order");
  require(std::isfinite(value), "kernel coefficients must be finite");
  check_tuple(tuple, truncation_);
  std::vector<Index> key(tuple.begin(), tuple.end());
  if (symmetric_) {
    require(std::is_sorted(key.begin(), key.end()),
            "symmetric kernel entries must use sorted tuples");
  }
  pending_.emplace_back(std::move(key), value);
}

void KernelBuilder::add_kernel(const ScalarKernel& k, double factor) {
  require(k.order() == order_ && k.truncation() == truncation_,
          "add_kernel: order or truncation mismatch");
  if (symmetric_) {
    require(k.is_symmetric(), "add_kernel: symmetric builder needs a symmetric kernel");
    for (std::size_t e = 0; e < k.size(); ++e) {
      auto t = k.indices(e);
      pending_.emplace_back(std::vector<Index>(t.begin(), t.end()), factor * k.value(e));
    }
    return;
  }
  k.for_each_ordered([&](std::span<const Index> t, double v) {
    pending_.emplace_back(std::vector<Index>(t.begin(), t.end()), factor * v);
  });
}

ScalarKernel KernelBuilder::build() const {
  auto sorted = pending_;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  ScalarKernel k(order_, truncation_);
  k.symmetric_ = symmetric_;
  for (std::size_t i = 0; i < sorted.size();) {
    double sum = 0.0;
    std::size_t j = i;
    for (; j < sorted.size() && sorted[j].first == sorted[i].first; ++j) sum += sorted[j].second;
    if (sum != 0.0) {
      k.indices_.insert(k.indices_.end(), sorted[i].first.begin(), sorted[i].first.end());
      k.values_.push_back(sum);
    }
    i = j;
  }
  return k;
}

// ---------------------------------------------------------------- operations

ScalarKernel symmetrize(const ScalarKernel& f) {
  if (f.is_symmetric()) return f;
  // Sym(f)(s) is the average of f over the distinct orderings of s.
  std::map<std::vector<Index>, double> acc;
  for (std::size_t e = 0; e < f.size(); ++e) {
    auto t = f.indices(e);
    std::vector<Index> key(t.begin(), t.end());
    std::sort(key.begin(), key.end());
    acc[key] += f.value(e);
  }
  KernelBuilder b(f.order(), f.truncation(), true);
  for (const auto& [key, sum] : acc) b.add(key, sum / arrangement_count(key));
  return b.build();
}

ScalarKernel contract_scalar(const ScalarKernel& f, const ScalarKernel& g, int r) {
  const int p = f.order();
  const int q = g.order();
  require(r >= 0 && r <= std::min(p, q),
          "contract_scalar: r = " + std::to_string(r) + " outside [0, min(p, q)]");
  require(f.truncation() == g.truncation(), "contract_scalar: truncation mismatch");
  const ScalarKernel fs = symmetrize(f);
  const ScalarKernel gs = symmetrize(g);
  const std::size_t ur = static_cast<std::size_t>(r);

  // f grouped by its last r indices, g by its first r indices.
  std::map<std::vector<Index>, std::vector<std::pair<std::vector<Index>, double>>> f_by_tail;
  fs.for_each_ordered([&](std::span<const Index> t, double v) {
    std::vector<Index> head(t.begin(), t.end() - static_cast<std::ptrdiff_t>(ur));
    std::vector<Index> tail(t.end() - static_cast<std::ptrdiff_t>(ur), t.end());
    f_by_tail[std::move(tail)].emplace_back(std::move(head), v);
  });
  std::map<std::vector<Index>, std::vector<std::pair<std::vector<Index>, double>>> g_by_head;
  gs.for_each_ordered([&](std::span<const Index> t, double v) {
    std::vector<Index> head(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(ur));
    std::vector<Index> rest(t.begin() + static_cast<std::ptrdiff_t>(ur), t.end());
    g_by_head[std::move(head)].emplace_back(std::move(rest), v);
  });

  const int order = p + q - 2 * r;
  KernelBuilder b(order, f.truncation(), false);
  std::vector<Index> key;
  for (const auto& [u, f_list] : f_by_tail) {
    auto it = g_by_head.find(u);
    if (it == g_by_head.end()) continue;
    for (const auto& [a, va] : f_list) {
      for (const auto& [c, vc] : it->second) {
        key.assign(a.begin(), a.end());
        key.insert(key.end(), c.begin(), c.end());
        b.add(key, va * vc);
      }
    }
  }
  return b.build();
}

double hs_inner(const ScalarKernel& f, const ScalarKernel& g) {
  require(f.order() == g.order(), "hs_inner: order mismatch");
  require(f.truncation() == g.truncation(), "hs_inner: truncation mismatch");
  if (f.is_symmetric() && g.is_symmetric()) {
    // Sorted-key merge, each key weighted by its number of orderings.
    const std::size_t p = static_cast<std::size_t>(f.order());
    std::size_t i = 0, j = 0;
    double s = 0.0;
    while (i < f.size() && j < g.size()) {
      auto a = f.indices(i);
      auto b = g.indices(j);
      if (std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end())) {
        ++i;
      } else if (std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end())) {
        ++j;
      } else {
        s += f.value(i) * g.value(j) * (p <= 1 ? 1.0 : arrangement_count(a));
        ++i;
        ++j;
      }
    }
    return s;
  }
  const auto fe = f.ordered_entries();
  const auto ge = g.ordered_entries();
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < fe.size() && j < ge.size()) {
    if (fe[i].first < ge[j].first) {
      ++i;
    } else if (ge[j].first < fe[i].first) {
      ++j;
    } else {
      s += fe[i].second * ge[j].second;
      ++i;
      ++j;
    }
  }
  return s;
}

double hs_norm(const ScalarKernel& f) {
  if (f.is_symmetric()) {
    double s = 0.0;
    const bool low = f.order() <= 1;
    for (std::size_t e = 0; e < f.size(); ++e)
      s += f.value(e) * f.value(e) * (low ? 1.0 : arrangement_count(f.indices(e)));
    return std::sqrt(s);
  }
  double s = 0.0;
  for (std::size_t e = 0; e < f.size(); ++e) s += f.value(e) * f.value(e);
  return std::sqrt(s);
}

ScalarKernel add_kernels(const ScalarKernel& f, const ScalarKernel& g, double alpha,
                         double beta) {
  require(f.order() == g.order() && f.truncation() == g.truncation(),
          "add_kernels: order or truncation mismatch");
  const bool sym = f.is_symmetric() && g.is_symmetric();
  KernelBuilder b(f.order(), f.truncation(), sym);
  b.add_kernel(f, alpha);
  b.add_kernel(g, beta);
  return b.build();
}

ScalarKernel random_symmetric_kernel(int order, Index truncation, std::size_t entries,
                                     GaussianStream& rng) {
  KernelBuilder b(order, truncation, true);
  std::vector<Index> t(static_cast<std::size_t>(order));
  for (std::size_t e = 0; e < entries; ++e) {
    for (Index& i : t)
      i = 1 + std::min<Index>(truncation - 1, static_cast<Index>(rng.uniform() * truncation));
    std::sort(t.begin(), t.end());
    b.add(t, rng());
  }
  return b.build();
}

// ---------------------------------------------------------------- VectorKernel

VectorKernel::VectorKernel(int order, Index truncation, const PathVector& grid_like)
    : order_(order), truncation_(truncation), grid_(grid_like) {
  require(order >= 0, "vector kernel order must be nonnegative");
  require(truncation >= 1, "vector kernel truncation must be positive");
}

void VectorKernel::add_term(ScalarKernel kernel, PathVector path) {
  require(kernel.order() == order_, "add_term: kernel order mismatch");
  require(kernel.truncation() == truncation_, "add_term: truncation mismatch");
  require(path.same_grid(grid_), "add_term: path grid mismatch");
  terms_.push_back({std::move(kernel), std::move(path)});
}

double VectorKernel::nuclear_bound() const {
  double s = 0.0;
  for (const auto& t : terms_) s += hs_norm(t.kernel) * t.path.sup_norm();
  return s;
}

VectorKernel VectorKernel::merged() const {
  PathRegistry reg;
  std::vector<std::vector<const ScalarKernel*>> groups;
  for (const auto& t : terms_) {
    const std::size_t id = reg.id_of(t.path);
    if (id == groups.size()) groups.emplace_back();
    groups[id].push_back(&t.kernel);
  }
  VectorKernel out(order_, truncation_, grid_);
  for (std::size_t id = 0; id < groups.size(); ++id) {
    bool sym = true;
    for (const auto* k : groups[id]) sym = sym && k->is_symmetric();
    KernelBuilder b(order_, truncation_, sym);
    for (const auto* k : groups[id]) b.add_kernel(*k);
    out.terms_.push_back({b.build(), reg.path(id)});
  }
  return out;
}

VectorKernel VectorKernel::symmetrized() const {
  VectorKernel out(order_, truncation_, grid_);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) out.terms_.push_back({symmetrize(t.kernel), t.path});
  return out;
}

// ---------------------------------------------------------------- VectorTensorKernel

VectorTensorKernel::VectorTensorKernel(int order, Index truncation, const PathVector& grid_like)
    : order_(order), truncation_(truncation), grid_(grid_like) {
  require(order >= 0, "tensor kernel order must be nonnegative");
  require(truncation >= 1, "tensor kernel truncation must be positive");
}

void VectorTensorKernel::add_term(ScalarKernel kernel, PathVector left, PathVector right) {
  require(kernel.order() == order_, "add_term: kernel order mismatch");
  require(kernel.truncation() == truncation_, "add_term: truncation mismatch");
  require(left.same_grid(grid_) && right.same_grid(grid_), "add_term: path grid mismatch");
  terms_.push_back({std::move(kernel), std::move(left), std::move(right)});
}

VectorTensorKernel VectorTensorKernel::merged() const {
  PathRegistry reg;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> slot;
  std::vector<std::pair<std::size_t, std::size_t>> keys;
  std::vector<std::vector<const ScalarKernel*>> groups;
  for (const auto& t : terms_) {
    const auto key = std::make_pair(reg.id_of(t.left), reg.id_of(t.right));
    auto [it, inserted] = slot.emplace(key, groups.size());
    if (inserted) {
      groups.emplace_back();
      keys.push_back(key);
    }
    groups[it->second].push_back(&t.kernel);
  }
  VectorTensorKernel out(order_, truncation_, grid_);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    bool sym = true;
    for (const auto* k : groups[g]) sym = sym && k->is_symmetric();
    KernelBuilder b(order_, truncation_, sym);
    for (const auto* k : groups[g]) b.add_kernel(*k);
    out.terms_.push_back({b.build(), reg.path(keys[g].first), reg.path(keys[g].second)});
  }
  return out;
}

VectorTensorKernel VectorTensorKernel::symmetrized() const {
  VectorTensorKernel out(order_, truncation_, grid_);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) out.terms_.push_back({symmetrize(t.kernel), t.left, t.right});
  return out;
}

VectorTensorKernel VectorTensorKernel::scaled(double factor) const {
  VectorTensorKernel out(order_, truncation_, grid_);
  out.terms_.reserve(terms_.size());
  for (const auto& t : terms_) out.terms_.push_back({t.kernel.scaled(factor), t.left, t.right});
  return out;
}

void VectorTensorKernel::append(const VectorTensorKernel& other) {
  require(other.order_ == order_ && other.truncation_ == truncation_ &&
              other.grid_.same_grid(grid_),
          "append: incompatible tensor kernels");
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
}

VectorTensorKernel contract_vector(const VectorKernel& f, const VectorKernel& g, int r,
                                   TermSelection selection) {
  check_same_space(f.order(), f.truncation(), f.grid(), g.order(), g.truncation(), g.grid(),
                   "contract_vector");
  require(r >= 1 && r <= std::min(f.order(), g.order()),
          "contract_vector: r = " + std::to_string(r) + " outside [1, min(p, q)]");
  VectorTensorKernel out(f.order() + g.order() - 2 * r, f.truncation(), f.grid());

  if (selection == TermSelection::all) {
    for (const auto& a : f.terms())
      for (const auto& b : g.terms())
        out.add_term(contract_scalar(a.kernel, b.kernel, r), a.path, b.path);
    return out;
  }

  // r >= 1 needs a shared basis index; bucket g's terms by index.
  std::unordered_map<Index, std::vector<std::size_t>> g_by_index;
  const auto gt = g.terms();
  for (std::size_t k = 0; k < gt.size(); ++k)
    for (Index i : gt[k].kernel.support()) g_by_index[i].push_back(k);
  std::vector<std::size_t> candidates;
  for (const auto& a : f.terms()) {
    candidates.clear();
    for (Index i : a.kernel.support()) {
      auto it = g_by_index.find(i);
      if (it != g_by_index.end())
        candidates.insert(candidates.end(), it->second.begin(), it->second.end());
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (std::size_t k : candidates) {
      ScalarKernel c = contract_scalar(a.kernel, gt[k].kernel, r);
      if (!c.empty()) out.add_term(std::move(c), a.path, gt[k].path);
    }
  }
  return out;
}

double projective_norm_upper(const VectorTensorKernel& u) {
  const VectorTensorKernel m = u.merged();
  double s = 0.0;
  for (const auto& t : m.terms())
    s += hs_norm(t.kernel) * t.left.sup_norm() * t.right.sup_norm();
  return s;
}

McEstimate gamma_norm_mc(const VectorKernel& f, std::size_t samples, std::uint64_t seed) {
  require(samples >= 1, "gamma_norm_mc: need at least one sample");
  const VectorKernel m = f.merged();
  const std::size_t p = static_cast<std::size_t>(m.order());
  const std::size_t n = m.truncation();
  std::vector<std::vector<ScalarKernel::Entry>> expansions;
  expansions.reserve(m.size());
  for (const auto& t : m.terms()) expansions.push_back(t.kernel.ordered_entries());

  const std::size_t chunks = chunk_count(samples, kDefaultChunk);
  std::vector<RunningStats> stats(chunks);
  parallel_chunks(samples, kDefaultChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    std::vector<double> gauss(p * n);
    PathAccumulator acc(m.grid());
    for (std::size_t s = begin; s < end; ++s) {
      rng.fill(gauss);
      acc.reset();
      for (std::size_t j = 0; j < expansions.size(); ++j) {
        double w = 0.0;
        for (const auto& [tuple, v] : expansions[j]) {
          double prod = v;
          for (std::size_t l = 0; l < p; ++l) prod *= gauss[l * n + (tuple[l] - 1)];
          w += prod;
        }
        acc.add_scaled(w, m.terms()[j].path);
      }
      const double norm = acc.sup_norm();
      stats[c].push(norm * norm);
    }
  });
  RunningStats total;
  for (const auto& s : stats) total.merge(s);
  const double mean_sq = total.mean();
  const double est = std::sqrt(std::max(0.0, mean_sq));
  const double se = est > 0.0 ? total.standard_error() / (2.0 * est) : 0.0;
  return {est, se, samples};
}

}  // namespace chaosbound
