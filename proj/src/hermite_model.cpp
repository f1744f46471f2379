#include "chaosbound/hermite_model.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/trigamma.hpp>

#include "chaosbound/bounds.hpp"
#include "chaosbound/errors.hpp"
#include "chaosbound/flatmetric.hpp"
#include "chaosbound/gamma.hpp"

namespace chaosbound {
namespace {

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

}  // namespace

KLSystem kl_system(double horizon, std::size_t modes, std::size_t steps) {
  require(horizon > 0.0 && std::isfinite(horizon), "kl_system: T must be positive");
  require(modes >= 1 && steps >= 1, "kl_system: M and G must be positive");
  KLSystem kl{horizon, {}, {}};
  const double amp = std::sqrt(2.0 / horizon);
  for (std::size_t m = 1; m <= modes; ++m) {
    const double freq = (static_cast<double>(m) - 0.5) * std::numbers::pi;
    kl.eigenvalues.push_back(horizon * horizon / (freq * freq));
    kl.eigenfunctions.push_back(PathVector::from_function(
        horizon, steps, [&](double t) { return amp * std::sin(freq * t / horizon); }));
  }
  return kl;
}

double kl_tail_mass(double horizon, std::size_t modes) {
  return horizon * horizon / (std::numbers::pi * std::numbers::pi) *
         boost::math::trigamma(static_cast<double>(modes) + 0.5);
}

Eigen::MatrixXd kl_covariance(const KLSystem& kl) {
  const auto nodes = static_cast<Eigen::Index>(kl.eigenfunctions.front().nodes());
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(nodes, nodes);
  for (std::size_t m = 0; m < kl.modes(); ++m) {
    const auto v = kl.eigenfunctions[m].values();
    Eigen::Map<const Eigen::VectorXd> phi(v.data(), nodes);
    cov.noalias() += kl.eigenvalues[m] * phi * phi.transpose();
  }
  return cov;
}

void HermiteModelConfig::validate() const {
  require(p >= 1, "hermite model: p must be positive");
  require(n >= 1, "hermite model: n must be positive");
  require(modes >= 1, "hermite model: M must be positive");
  require(horizon > 0.0 && std::isfinite(horizon), "hermite model: T must be positive");
  require(steps >= 1, "hermite model: grid size must be positive");
  require(tail_tolerance > 0.0, "hermite model: tail tolerance must be positive");
  basis_size();
  const double rel_tail = kl_tail_mass(horizon, modes) / (0.5 * horizon * horizon);
  require(rel_tail <= tail_tolerance,
          "hermite model: M = " + std::to_string(modes) + " leaves KL tail fraction " +
              std::to_string(rel_tail) + " above tolerance " + std::to_string(tail_tolerance));
}

Index HermiteModelConfig::basis_size() const {
  const std::uint64_t size = static_cast<std::uint64_t>(n) * modes;
  require(size <= 0xffffffffULL, "hermite model: n * M overflows the basis index");
  return static_cast<Index>(size);
}

nlohmann::json HermiteModelConfig::to_json() const {
  return {{"p", p},       {"n", n},
          {"M", modes},   {"T", horizon},
          {"G", steps},   {"tail_tolerance", tail_tolerance},
          {"seed", seed}, {"index_layout", "(k - 1) * M + m"}};
}

VectorKernel build_kernel(const HermiteModelConfig& cfg, const KLSystem& kl) {
  cfg.validate();
  require(kl.modes() == cfg.modes, "build_kernel: KL system has the wrong number of modes");
  const Index basis = cfg.basis_size();
  const auto modes = static_cast<Index>(cfg.modes);
  VectorKernel f(cfg.p, basis, kl.eigenfunctions.front());
  const double scale = 1.0 / (factorial(cfg.p) * cfg.n);
  for (Index k = 1; k <= cfg.n; ++k)
    for (Index m = 1; m <= modes; ++m)
      f.add_term(ScalarKernel::basis_power(flat_index(k, m, modes), cfg.p, basis,
                                           std::sqrt(kl.eigenvalues[m - 1] * scale)),
                 kl.eigenfunctions[m - 1]);
  return f;
}

VectorKernel build_kernel(const HermiteModelConfig& cfg) {
  return build_kernel(cfg, kl_system(cfg.horizon, cfg.modes, cfg.steps));
}

PathVector hermite_path(const HermiteModelConfig& cfg, const KLSystem& kl,
                        const GaussianDraw& draw) {
  require(draw.size() == cfg.basis_size(), "hermite_path: draw size must be n * M");
  const std::size_t modes = cfg.modes;
  std::vector<double> block(modes, 0.0);
  const auto xi = draw.values();
  for (std::size_t k = 0; k < cfg.n; ++k)
    for (std::size_t m = 0; m < modes; ++m) block[m] += hermite(cfg.p, xi[k * modes + m]);
  const double scale = 1.0 / std::sqrt(factorial(cfg.p) * cfg.n);
  PathAccumulator acc(kl.eigenfunctions.front());
  for (std::size_t m = 0; m < modes; ++m)
    acc.add_scaled(scale * std::sqrt(kl.eigenvalues[m]) * block[m], kl.eigenfunctions[m]);
  return acc.finish();
}

PathSampler hermite_sampler(const HermiteModelConfig& cfg, const KLSystem& kl) {
  cfg.validate();
  return [cfg, kl](GaussianStream& rng) {
    return hermite_path(cfg, kl, GaussianDraw::sample(cfg.basis_size(), rng));
  };
}

PathSampler kl_brownian_sampler(const KLSystem& kl) {
  return [kl](GaussianStream& rng) {
    PathAccumulator acc(kl.eigenfunctions.front());
    for (std::size_t m = 0; m < kl.modes(); ++m)
      acc.add_scaled(std::sqrt(kl.eigenvalues[m]) * rng(), kl.eigenfunctions[m]);
    return acc.finish();
  };
}

std::vector<ContractionCheck> contraction_bound_check(const HermiteModelConfig& cfg) {
  require(cfg.p >= 2, "contraction_bound_check: needs p >= 2");
  const KLSystem kl = kl_system(cfg.horizon, cfg.modes, cfg.steps);
  const VectorKernel f = build_kernel(cfg, kl);
  const double pf = factorial(cfg.p);
  const double tail = (2.0 / cfg.horizon) * kl_tail_mass(cfg.horizon, cfg.modes) /
                      (pf * std::sqrt(static_cast<double>(cfg.n)));
  std::vector<ContractionCheck> out;
  for (int r = 1; r < cfg.p; ++r) {
    const double truncated = projective_norm_upper(
        contract_vector(f, f, r, TermSelection::overlapping).symmetrized());
    const double total = truncated + tail;
    out.push_back({r, truncated, tail, total, total * total,
                   cfg.horizon / (cfg.n * pf * pf)});
  }
  return out;
}

GridCovariance grid_covariance_mc(const PathSampler& sampler, std::size_t samples,
                                  std::uint64_t seed) {
  require(samples >= 2, "grid_covariance_mc: need at least two samples");
  struct Sums {
    Eigen::VectorXd x;
    Eigen::MatrixXd xy;
    Eigen::MatrixXd xy2;
  };
  const std::size_t chunk = 1024;
  std::vector<Sums> parts(chunk_count(samples, chunk));
  parallel_chunks(samples, chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    Sums& s = parts[c];
    for (std::size_t i = begin; i < end; ++i) {
      const PathVector path = sampler(rng);
      require(path.dim() == 1, "grid_covariance_mc: scalar paths only");
      const auto v = path.values();
      Eigen::Map<const Eigen::VectorXd> x(v.data(), static_cast<Eigen::Index>(v.size()));
      if (s.x.size() == 0) {
        s.x = Eigen::VectorXd::Zero(x.size());
        s.xy = Eigen::MatrixXd::Zero(x.size(), x.size());
        s.xy2 = Eigen::MatrixXd::Zero(x.size(), x.size());
      }
      const Eigen::MatrixXd outer = x * x.transpose();
      s.x += x;
      s.xy += outer;
      s.xy2 += outer.cwiseProduct(outer);
    }
  });
  Sums total = parts.front();
  for (std::size_t c = 1; c < parts.size(); ++c) {
    total.x += parts[c].x;
    total.xy += parts[c].xy;
    total.xy2 += parts[c].xy2;
  }
  const double n = static_cast<double>(samples);
  const Eigen::VectorXd mean = total.x / n;
  const Eigen::MatrixXd second = total.xy / n;
  GridCovariance out;
  out.covariance = (total.xy - n * mean * mean.transpose()) / (n - 1.0);
  out.standard_error =
      ((total.xy2 / n - second.cwiseProduct(second)).cwiseMax(0.0) / n).cwiseSqrt();
  out.samples = samples;
  return out;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "loglog_slope: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    require(x[i] > 0.0 && y[i] > 0.0, "loglog_slope: values must be positive");
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double k = static_cast<double>(x.size());
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

RateTable rate_experiment(const HermiteModelConfig& cfg, const std::vector<Index>& n_list,
                          const RateOptions& options) {
  require(!n_list.empty(), "rate_experiment: empty n list");
  require(cfg.p >= 2, "rate_experiment: needs p >= 2");
  cfg.validate();
  const KLSystem kl = kl_system(cfg.horizon, cfg.modes, cfg.steps);
  const Eigen::MatrixXd r_z = kl_covariance(kl);
  const PathSampler z = kl_brownian_sampler(kl);

  RateTable table;
  table.base = cfg;
  table.options = options;
  const McEstimate sd = estimate_sd(1, options.sd_samples, options.sd_steps,
                                    derive_seed(cfg.seed, 0x5d));
  table.s_d = sd.estimate;
  table.s_d_se = sd.standard_error;
  // Gap model M eps^beta fitted to the reference process.
  table.gap_constant = 0.0;
  for (double eps : {0.2, 0.1, 0.05}) {
    const auto rep = regularization_gap_mc(z, eps * cfg.horizon, options.gap_samples,
                                           derive_seed(cfg.seed, 0x9a));
    table.gap_constant =
        std::max(table.gap_constant, rep.mean_sup_gap / std::pow(eps * cfg.horizon, options.beta));
  }

  std::vector<double> ns, certs, devs, emps;
  for (Index n : n_list) {
    HermiteModelConfig c = cfg;
    c.n = n;
    c.seed = derive_seed(cfg.seed, n);
    const VectorKernel f = build_kernel(c, kl);
    RateRow row{n, 0.0, 0.0, 0.0, 0.0, c.seed, {}};
    row.deviation_bound = gamma_deviation_bound(f, f).total;
    const CovTensor r_f = covariance_tensor(f, f);
    const BoundCertificate cert = dbl_contraction_rate_bound(
        f, r_f.matrix, r_z, options.beta, table.gap_constant, cfg.horizon, 1.0, table.s_d);
    row.certificate_total = cert.total;
    row.certificate = to_json(cert);
    if (options.empirical_samples > 0) {
      const std::size_t count = options.empirical_samples;
      const bool exact = count <= options.exact_threshold;
      const EmpiricalMeasure fx = sample_measure(hermite_sampler(c, kl), count, derive_seed(c.seed, 1));
      const EmpiricalMeasure zx = sample_measure(z, count, derive_seed(c.seed, 2));
      row.empirical_dbl = exact ? empirical_dbl(fx, zx)
                                : sliced_dbl_lower(fx, zx, options.directions, derive_seed(c.seed, 3));
      row.noise_floor = dbl_selfconsistency(z, count, derive_seed(c.seed, 4),
                                            exact ? DblMethod::exact : DblMethod::sliced,
                                            options.directions);
    }
    ns.push_back(n);
    certs.push_back(row.certificate_total);
    devs.push_back(row.deviation_bound);
    emps.push_back(row.empirical_dbl);
    table.rows.push_back(std::move(row));
  }
  table.certificate_slope = ns.size() >= 2 ? loglog_slope(ns, certs) : 0.0;
  table.deviation_slope = ns.size() >= 2 ? loglog_slope(ns, devs) : 0.0;
  bool positive = ns.size() >= 2;
  for (double e : emps) positive = positive && e > 0.0;
  table.empirical_slope = positive ? loglog_slope(ns, emps) : 0.0;
  return table;
}

std::string rate_csv(const RateTable& table) {
  std::ostringstream out;
  out << "n,deviation_bound,certificate_total,empirical_dbl,noise_floor,seeds\n";
  char buf[160];
  for (const auto& r : table.rows) {
    std::snprintf(buf, sizeof buf, "%u,%.17g,%.17g,%.17g,%.17g,%llu\n", r.n, r.deviation_bound,
                  r.certificate_total, r.empirical_dbl, r.noise_floor,
                  static_cast<unsigned long long>(r.seed));
    out << buf;
  }
  return out.str();
}

}  // namespace chaosbound
