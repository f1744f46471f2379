#include "chaosbound/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "chaosbound/errors.hpp"

namespace chaosbound {
namespace {

std::uint64_t binomial_u(int n, int k) {
  std::uint64_t b = 1;
  for (int i = 1; i <= k; ++i) b = b * static_cast<std::uint64_t>(n - k + i) / i;
  return b;
}

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const PathVector& x) {
  const auto v = x.values();
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void check_pair(const VectorKernel& f, const VectorKernel& g, const char* what) {
  require(f.truncation() == g.truncation(), std::string(what) + ": truncation mismatch");
  require(f.grid().same_grid(g.grid()), std::string(what) + ": grid mismatch");
}

}  // namespace

std::uint64_t a_coeff(int p, int q, int r) {
  require(p >= 1 && q >= 1, "a_coeff: orders must be positive");
  require(r >= 1 && r <= std::min(p, q),
          "a_coeff: r = " + std::to_string(r) + " outside [1, min(p, q)]");
  std::uint64_t fact = 1;
  for (int i = 2; i <= r - 1; ++i) fact *= static_cast<std::uint64_t>(i);
  return static_cast<std::uint64_t>(p) * static_cast<std::uint64_t>(q) * fact *
         binomial_u(p - 1, r - 1) * binomial_u(q - 1, r - 1);
}

GammaDecomposition gamma_decompose(const VectorKernel& f, const VectorKernel& g,
                                   TermSelection selection) {
  require(f.order() >= 1 && g.order() >= 1, "gamma_decompose: orders must be positive");
  check_pair(f, g, "gamma_decompose");
  GammaDecomposition d{f.order(), g.order(), {}};
  for (int r = 1; r <= std::min(d.p, d.q); ++r) {
    d.terms.push_back({r, static_cast<double>(a_coeff(d.p, d.q, r)),
                       contract_vector(f, g, r, selection).symmetrized()});
  }
  return d;
}

Eigen::MatrixXd sample_tensor_integral(const VectorTensorKernel& u, const GaussianDraw& draw) {
  require(draw.size() == u.truncation(), "sample_tensor_integral: draw size mismatch");
  const auto rows = static_cast<Eigen::Index>(u.grid().values().size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, rows);
  const HermiteTable h(draw, u.order());
  for (const auto& t : u.terms()) {
    const double w = ChaosEvaluator(t.kernel)(h);
    if (w != 0.0) out.noalias() += w * as_vector(t.left) * as_vector(t.right).transpose();
  }
  return out;
}

Eigen::MatrixXd sample_decomposition(const GammaDecomposition& d, const GaussianDraw& draw,
                                     int max_r) {
  Eigen::MatrixXd out;
  for (const auto& term : d.terms) {
    if (term.r > max_r) continue;
    Eigen::MatrixXd m = term.a * sample_tensor_integral(term.kernel, draw);
    if (out.size() == 0)
      out = std::move(m);
    else
      out += m;
  }
  require(out.size() != 0, "sample_decomposition: no terms selected");
  return out;
}

Eigen::MatrixXd malliavin_gamma_paths(const VectorKernel& f, const VectorKernel& g,
                                      const GaussianDraw& draw) {
  check_pair(f, g, "malliavin_gamma_paths");
  require(f.order() >= 1 && g.order() >= 1, "malliavin_gamma_paths: orders must be positive");
  require(draw.size() == f.truncation(), "malliavin_gamma_paths: draw size mismatch");
  const Index n = f.truncation();
  const auto rows = static_cast<Eigen::Index>(f.grid().values().size());
  const HermiteTable h(draw, std::max(f.order(), g.order()));

  // Row k - 1 holds D_k I_p(f) as a grid vector.
  auto derivative = [&](const VectorKernel& k) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, rows);
    for (const auto& t : k.terms()) {
      const auto comps = malliavin_components(t.kernel);
      for (Index i = 0; i < n; ++i) {
        if (comps[i].empty()) continue;
        d.row(i) += ChaosEvaluator(comps[i])(h) * as_vector(t.path).transpose();
      }
    }
    return d;
  };
  const Eigen::MatrixXd df = derivative(f);
  const Eigen::MatrixXd dg = derivative(g);
  return df.transpose() * dg;
}

CovTensor covariance_tensor(const VectorKernel& f, const VectorKernel& g) {
  check_pair(f, g, "covariance_tensor");
  const auto rows = static_cast<Eigen::Index>(f.grid().values().size());
  CovTensor cov{VectorTensorKernel(0, f.truncation(), f.grid()),
                Eigen::MatrixXd::Zero(rows, rows)};
  if (f.order() != g.order()) return cov;
  const int p = f.order();
  if (p == 0) {
    for (const auto& a : f.terms())
      for (const auto& b : g.terms())
        cov.tensor.add_term(contract_scalar(a.kernel, b.kernel, 0), a.path, b.path);
    cov.tensor = cov.tensor.merged();
  } else {
    cov.tensor =
        contract_vector(f, g, p, TermSelection::overlapping).scaled(factorial(p)).merged();
  }
  for (const auto& t : cov.tensor.terms()) {
    if (t.kernel.empty()) continue;
    cov.matrix.noalias() += t.kernel.value(0) * as_vector(t.left) * as_vector(t.right).transpose();
  }
  return cov;
}

double trace_norm(const Eigen::MatrixXd& m) {
  require(m.rows() == m.cols(), "trace_norm: matrix must be square");
  require(m.allFinite(), "trace_norm: non-finite entries");
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues().sum();
}

DeviationReport gamma_deviation_bound(const VectorKernel& f, const VectorKernel& g,
                                      DeviationMode mode, double kappa, double m) {
  require(f.order() >= 1 && g.order() >= 1, "gamma_deviation_bound: orders must be positive");
  check_pair(f, g, "gamma_deviation_bound");
  const int p = f.order();
  const int q = g.order();
  DeviationReport report{p, q, {}, 0.0};
  for (int r = 1; r <= std::min(p, q) - 1; ++r) {
    const int k = p + q - 2 * r;
    const double c = mode == DeviationMode::hilbert
                         ? std::sqrt(factorial(k))
                         : isometry_constants(k, m, kappa, IsometryMode::generic).upper;
    const double a = static_cast<double>(a_coeff(p, q, r));
    const double norm =
        projective_norm_upper(contract_vector(f, g, r, TermSelection::overlapping).symmetrized());
    const double contribution = a * c * norm / q;
    report.terms.push_back({r, a, c, norm, contribution});
    report.total += contribution;
  }
  return report;
}

nlohmann::json to_json(const DeviationReport& report) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : report.terms)
    terms.push_back({{"r", t.r},
                     {"a", t.a},
                     {"C_const", t.c_const},
                     {"contraction_norm", t.contraction_norm},
                     {"contribution", t.contribution}});
  return {{"p", report.p}, {"q", report.q}, {"terms", std::move(terms)}, {"total", report.total}};
}

McEstimate gamma_deviation_mc(const VectorKernel& f, std::size_t samples, std::uint64_t seed) {
  require(samples >= 1, "gamma_deviation_mc: need at least one sample");
  const int p = f.order();
  if (p <= 1) return {0.0, 0.0, samples};

  struct Piece {
    ChaosEvaluator eval;
    double scale;
    std::size_t pair;
  };
  std::vector<std::pair<PathVector, PathVector>> pairs;
  std::vector<double> pair_norm;
  std::vector<Piece> pieces;
  const GammaDecomposition d = gamma_decompose(f, f);
  for (const auto& term : d.terms) {
    if (term.r > p - 1) continue;
    const VectorTensorKernel merged = term.kernel.merged();
    for (const auto& t : merged.terms()) {
      std::size_t id = 0;
      while (id < pairs.size() && !(pairs[id].first == t.left && pairs[id].second == t.right)) ++id;
      if (id == pairs.size()) {
        pairs.emplace_back(t.left, t.right);
        pair_norm.push_back(t.left.sup_norm() * t.right.sup_norm());
      }
      pieces.push_back({ChaosEvaluator(t.kernel), term.a * apply_neg_Linv(p), id});
    }
  }

  const std::size_t chunks = chunk_count(samples, kDefaultChunk);
  std::vector<RunningStats> stats(chunks);
  parallel_chunks(samples, kDefaultChunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    std::vector<double> coef(pairs.size());
    for (std::size_t s = begin; s < end; ++s) {
      const HermiteTable h(GaussianDraw::sample(f.truncation(), rng), 2 * p - 2);
      std::fill(coef.begin(), coef.end(), 0.0);
      for (const auto& piece : pieces) coef[piece.pair] += piece.scale * piece.eval(h);
      double total = 0.0;
      for (std::size_t i = 0; i < coef.size(); ++i) total += std::abs(coef[i]) * pair_norm[i];
      stats[c].push(total);
    }
  });
  RunningStats all;
  for (const auto& s : stats) all.merge(s);
  return all.summary();
}

}  // namespace chaosbound
