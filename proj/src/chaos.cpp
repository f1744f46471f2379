#include "chaosbound/chaos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaosbound/errors.hpp"

namespace chaosbound {
namespace {

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return std::round(b);
}

void check_draw(Index truncation, const GaussianDraw& draw) {
  if (draw.size() != truncation)
    throw DomainError("draw has " + std::to_string(draw.size()) +
                      " coordinates, kernel truncation is " + std::to_string(truncation));
}

std::vector<double> sample_values(const ChaosEvaluator& eval, std::size_t samples,
                                  std::uint64_t seed) {
  std::vector<double> out(samples);
  parallel_chunks(samples, kDefaultChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    for (std::size_t s = begin; s < end; ++s) {
      const GaussianDraw draw = GaussianDraw::sample(eval.truncation(), rng);
      out[s] = eval(HermiteTable(draw, eval.order()));
    }
  });
  return out;
}

}  // namespace

double hermite(int k, double x) {
  require(k >= 0, "hermite: negative degree");
  if (k == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int j = 1; j < k; ++j) {
    const double next = x * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

GaussianDraw::GaussianDraw(std::vector<double> xi, std::uint64_t seed, std::uint64_t stream)
    : xi_(std::move(xi)), seed_(seed), stream_(stream) {
  require(!xi_.empty(), "GaussianDraw: empty draw");
  for (double v : xi_) require(std::isfinite(v), "GaussianDraw: non-finite coordinate");
}

GaussianDraw GaussianDraw::sample(Index n, std::uint64_t seed, std::uint64_t stream) {
  GaussianStream rng(seed, stream);
  std::vector<double> xi(n);
  rng.fill(xi);
  return GaussianDraw(std::move(xi), seed, stream);
}

GaussianDraw GaussianDraw::sample(Index n, GaussianStream& rng) {
  std::vector<double> xi(n);
  rng.fill(xi);
  return GaussianDraw(std::move(xi));
}

HermiteTable::HermiteTable(const GaussianDraw& draw, int max_order)
    : max_order_(max_order), n_(draw.size()), stride_(static_cast<std::size_t>(max_order) + 1) {
  require(max_order >= 0, "HermiteTable: negative order");
  table_.resize(static_cast<std::size_t>(n_) * stride_);
  const auto xi = draw.values();
  for (std::size_t i = 0; i < xi.size(); ++i) {
    double* row = table_.data() + i * stride_;
    row[0] = 1.0;
    if (max_order >= 1) row[1] = xi[i];
    for (int k = 1; k < max_order; ++k) row[k + 1] = xi[i] * row[k] - k * row[k - 1];
  }
}

ChaosEvaluator::ChaosEvaluator(const ScalarKernel& f, SymmetryPolicy policy)
    : order_(f.order()), truncation_(f.truncation()) {
  if (!f.is_symmetric() && policy == SymmetryPolicy::reject)
    throw DomainError("chaos integral of a non-symmetric kernel (policy: reject)");
  const ScalarKernel fs = symmetrize(f);
  weights_.reserve(fs.size());
  run_offsets_.reserve(fs.size() + 1);
  run_offsets_.push_back(0);
  for (std::size_t e = 0; e < fs.size(); ++e) {
    auto t = fs.indices(e);
    weights_.push_back(fs.value(e) * arrangement_count(t));
    for (std::size_t a = 0; a < t.size();) {
      std::size_t b = a;
      while (b < t.size() && t[b] == t[a]) ++b;
      runs_.emplace_back(t[a], static_cast<int>(b - a));
      a = b;
    }
    run_offsets_.push_back(runs_.size());
  }
}

double ChaosEvaluator::operator()(const HermiteTable& h) const {
  require(h.size() == truncation_ && h.max_order() >= order_,
          "ChaosEvaluator: Hermite table does not match the kernel");
  double sum = 0.0;
  for (std::size_t e = 0; e < weights_.size(); ++e) {
    double prod = weights_[e];
    for (std::size_t j = run_offsets_[e]; j < run_offsets_[e + 1]; ++j)
      prod *= h(runs_[j].first, runs_[j].second);
    sum += prod;
  }
  return sum;
}

double ChaosEvaluator::operator()(const GaussianDraw& draw) const {
  check_draw(truncation_, draw);
  return (*this)(HermiteTable(draw, order_));
}

double sample_scalar_integral(const ScalarKernel& f, const GaussianDraw& draw,
                              SymmetryPolicy policy) {
  check_draw(f.truncation(), draw);
  return ChaosEvaluator(f, policy)(draw);
}

PathVector sample_vector_integral(const VectorKernel& f, const GaussianDraw& draw,
                                  SymmetryPolicy policy) {
  check_draw(f.truncation(), draw);
  const HermiteTable h(draw, f.order());
  PathAccumulator acc(f.grid());
  for (const auto& t : f.terms()) acc.add_scaled(ChaosEvaluator(t.kernel, policy)(h), t.path);
  return acc.finish();
}

std::vector<ScalarKernel> malliavin_components(const ScalarKernel& f) {
  const int p = f.order();
  if (p == 0) return {};
  const ScalarKernel fs = symmetrize(f);
  const Index n = f.truncation();
  std::vector<KernelBuilder> builders;
  builders.reserve(n);
  for (Index k = 0; k < n; ++k) builders.emplace_back(p - 1, n, true);
  std::vector<Index> rest;
  for (std::size_t e = 0; e < fs.size(); ++e) {
    auto t = fs.indices(e);
    for (std::size_t a = 0; a < t.size(); ++a) {
      if (a > 0 && t[a] == t[a - 1]) continue;
      rest.assign(t.begin(), t.end());
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(a));
      builders[t[a] - 1].add(rest, p * fs.value(e));
    }
  }
  std::vector<ScalarKernel> out;
  out.reserve(n);
  for (const auto& b : builders) out.push_back(b.build());
  return out;
}

double malliavin_gamma(const ScalarKernel& f, const ScalarKernel& g, const GaussianDraw& draw) {
  require(f.order() >= 1 && g.order() >= 1, "malliavin_gamma: orders must be positive");
  require(f.truncation() == g.truncation(), "malliavin_gamma: truncation mismatch");
  check_draw(f.truncation(), draw);
  const auto df = malliavin_components(f);
  const auto dg = malliavin_components(g);
  const HermiteTable h(draw, std::max(f.order(), g.order()));
  double sum = 0.0;
  for (std::size_t k = 0; k < df.size(); ++k) {
    if (df[k].empty() || dg[k].empty()) continue;
    sum += ChaosEvaluator(df[k])(h) * ChaosEvaluator(dg[k])(h);
  }
  return sum;
}

McEstimate malliavin_gamma_mc(const ScalarKernel& f, const ScalarKernel& g, std::size_t samples,
                              std::uint64_t seed) {
  require(samples >= 2, "malliavin_gamma_mc: need at least two samples");
  require(f.order() >= 1 && g.order() >= 1, "malliavin_gamma_mc: orders must be positive");
  require(f.truncation() == g.truncation(), "malliavin_gamma_mc: truncation mismatch");
  const auto df = malliavin_components(f);
  const auto dg = malliavin_components(g);
  std::vector<std::pair<ChaosEvaluator, ChaosEvaluator>> parts;
  for (std::size_t k = 0; k < df.size(); ++k)
    if (!df[k].empty() && !dg[k].empty()) parts.emplace_back(ChaosEvaluator(df[k]), ChaosEvaluator(dg[k]));
  const int order = std::max(f.order(), g.order());
  std::vector<RunningStats> stats(chunk_count(samples, kDefaultChunk));
  parallel_chunks(samples, kDefaultChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    for (std::size_t s = begin; s < end; ++s) {
      const HermiteTable h(GaussianDraw::sample(f.truncation(), rng), order);
      double sum = 0.0;
      for (const auto& [a, b] : parts) sum += a(h) * b(h);
      stats[c].push(sum);
    }
  });
  RunningStats all;
  for (const auto& s : stats) all.merge(s);
  return all.summary();
}

double product_coefficient(int p, int q, int r) {
  require(r >= 0 && r <= std::min(p, q), "product_coefficient: r out of range");
  return factorial(r) * binomial(p, r) * binomial(q, r);
}

double product_formula_check(const ScalarKernel& f, const ScalarKernel& g,
                             const GaussianDraw& draw) {
  require(f.truncation() == g.truncation(), "product_formula_check: truncation mismatch");
  check_draw(f.truncation(), draw);
  const int p = f.order();
  const int q = g.order();
  const HermiteTable h(draw, p + q);
  const double lhs = ChaosEvaluator(f)(h) * ChaosEvaluator(g)(h);
  double rhs = 0.0;
  for (int r = 0; r <= std::min(p, q); ++r) {
    const ScalarKernel c = symmetrize(contract_scalar(f, g, r));
    rhs += product_coefficient(p, q, r) * ChaosEvaluator(c)(h);
  }
  return std::abs(lhs - rhs);
}

double apply_neg_Linv(int q) {
  require(q >= 1, "-L^{-1} is only defined on chaoses of order q >= 1");
  return 1.0 / q;
}

IsometryConstants isometry_constants(int p, double s, double kappa, IsometryMode mode) {
  require(p >= 0, "isometry_constants: p must be nonnegative");
  require(s >= 1.0, "isometry_constants: s must be at least 1");
  if (mode == IsometryMode::hilbert) {
    require(s == 2.0, "isometry_constants: hilbert mode needs s = 2");
    const double v = std::sqrt(factorial(p));
    return {v, v};
  }
  require(kappa > 0.0 && std::isfinite(kappa), "isometry_constants: kappa must be positive");
  const double pp = std::pow(static_cast<double>(p), p);  // 0^0 = 1
  const double ratio = factorial(p) / pp;
  const double lower = std::pow(2.0, (p - 1) / s) * std::sqrt(ratio) / kappa;
  const double upper = std::pow(4.0, (3.0 * p + 1.0) / s) * std::sqrt(1.0 / ratio) * kappa;
  return {lower, upper};
}

double isometry_variance(const ScalarKernel& f) {
  const double norm = hs_norm(symmetrize(f));
  return factorial(f.order()) * norm * norm;
}

McEstimate integral_variance_mc(const ScalarKernel& f, std::size_t samples, std::uint64_t seed) {
  require(samples >= 2, "integral_variance_mc: need at least two samples");
  const auto xs = sample_values(ChaosEvaluator(f), samples, seed);
  return sample_variance(xs);
}

McEstimate integral_covariance_mc(const ScalarKernel& f, const ScalarKernel& g,
                                  std::size_t samples, std::uint64_t seed) {
  require(samples >= 2, "integral_covariance_mc: need at least two samples");
  require(f.truncation() == g.truncation(), "integral_covariance_mc: truncation mismatch");
  const ChaosEvaluator ef(f), eg(g);
  const int order = std::max(f.order(), g.order());
  std::vector<double> xs(samples), ys(samples);
  parallel_chunks(samples, kDefaultChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    for (std::size_t s = begin; s < end; ++s) {
      const HermiteTable h(GaussianDraw::sample(f.truncation(), rng), order);
      xs[s] = ef(h);
      ys[s] = eg(h);
    }
  });
  return sample_covariance(xs, ys);
}

}  // namespace chaosbound
