#include "chaosbound/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>

#include "chaosbound/bounds.hpp"
#include "chaosbound/chaos.hpp"
#include "chaosbound/errors.hpp"
#include "chaosbound/flatmetric.hpp"
#include "chaosbound/gamma.hpp"
#include "chaosbound/hermite_model.hpp"
#include "chaosbound/regularization.hpp"

namespace chaosbound::cli {
namespace {

using nlohmann::json;
using Table = std::vector<json>;  // rows of flat objects with a shared key order

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_csv(const RunConfig& cfg, const std::vector<std::string>& columns,
                       const Table& rows) {
  std::ostringstream out;
  out << "# config: " << cfg.to_json().dump() << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const json& v = row.at(columns[c]);
      out << (c ? "," : "");
      if (v.is_number_float())
        out << format_number(v.get<double>());
      else if (v.is_string())
        out << v.get<std::string>();
      else
        out << v.dump();
    }
    out << '\n';
  }
  return out.str();
}

Artifact table_artifact(const RunConfig& cfg, const std::string& stem,
                        const std::vector<std::string>& columns, const Table& rows) {
  if (cfg.format == "csv") return {stem + ".csv", render_csv(cfg, columns, rows)};
  json doc = {{"config", cfg.to_json()}, {"rows", rows}};
  return {stem + ".json", doc.dump(2) + "\n"};
}

Artifact json_artifact(const RunConfig& cfg, const std::string& name, json body) {
  body["config"] = cfg.to_json();
  return {name, body.dump(2) + "\n"};
}

// ------------------------------------------------------------- subcommands

Outcome isometry_check(const RunConfig& cfg) {
  const auto kernels = cfg.count("kernels");
  const auto max_order = static_cast<int>(cfg.count("max_order"));
  const auto truncation = static_cast<Index>(cfg.count("truncation"));
  const auto entries = cfg.count("entries");
  const auto samples = cfg.count("samples");
  const double sigma = cfg.real("sigma");
  GaussianStream rng(cfg.seed, 0);
  Outcome o;
  Table rows;
  std::size_t failures = 0;
  for (std::size_t k = 0; k < kernels; ++k) {
    const int p = 1 + static_cast<int>(k % static_cast<std::size_t>(max_order));
    const ScalarKernel f = random_symmetric_kernel(p, truncation, entries, rng);
    const double expected = isometry_variance(f);
    const McEstimate mc = integral_variance_mc(f, samples, derive_seed(cfg.seed, 1000 + k));
    const bool ok = std::abs(mc.estimate - expected) <= sigma * mc.standard_error;
    failures += ok ? 0 : 1;
    rows.push_back({{"kernel", k}, {"p", p}, {"entries", f.size()}, {"expected", expected},
                    {"estimate", mc.estimate}, {"standard_error", mc.standard_error},
                    {"pass", ok}});
  }
  o.pass = failures == 0;
  o.summary = {{"kernels", kernels}, {"failures", failures}, {"sigma", sigma}};
  o.artifacts.push_back(table_artifact(
      cfg, "isometry-check",
      {"kernel", "p", "entries", "expected", "estimate", "standard_error", "pass"}, rows));
  return o;
}

struct KernelPair {
  ScalarKernel f;
  ScalarKernel g;
};

std::vector<KernelPair> random_pairs(const RunConfig& cfg, std::size_t pairs) {
  const auto max_order = static_cast<int>(cfg.count("max_order"));
  const auto truncation = static_cast<Index>(cfg.count("truncation"));
  const auto entries = cfg.count("entries");
  GaussianStream rng(cfg.seed, 0);
  std::vector<KernelPair> out;
  for (std::size_t k = 0; k < pairs; ++k) {
    const int p = 1 + static_cast<int>(k % static_cast<std::size_t>(max_order));
    const int q = 1 + static_cast<int>((k / static_cast<std::size_t>(max_order)) %
                                       static_cast<std::size_t>(max_order));
    ScalarKernel f = random_symmetric_kernel(p, truncation, entries, rng);
    ScalarKernel g = random_symmetric_kernel(q, truncation, entries, rng);
    out.push_back({std::move(f), std::move(g)});
  }
  return out;
}

Outcome product_check(const RunConfig& cfg) {
  const auto pairs = random_pairs(cfg, cfg.count("pairs"));
  const auto draws = cfg.count("draws");
  const double tol = cfg.real("tolerance");
  Outcome o;
  Table rows;
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    double max_res = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
      const auto draw = GaussianDraw::sample(pairs[k].f.truncation(), cfg.seed, 1 + k * draws + d);
      max_res = std::max(max_res, product_formula_check(pairs[k].f, pairs[k].g, draw));
    }
    worst = std::max(worst, max_res);
    rows.push_back({{"pair", k}, {"p", pairs[k].f.order()}, {"q", pairs[k].g.order()},
                    {"max_residual", max_res}, {"pass", max_res <= tol}});
  }
  o.pass = worst <= tol;
  o.summary = {{"pairs", pairs.size()}, {"draws", draws}, {"max_residual", worst},
               {"tolerance", tol}};
  o.artifacts.push_back(
      table_artifact(cfg, "product-check", {"pair", "p", "q", "max_residual", "pass"}, rows));
  return o;
}

VectorKernel as_point_kernel(const ScalarKernel& f) {
  const PathVector one = PathVector::point({1.0});
  VectorKernel v(f.order(), f.truncation(), one);
  v.add_term(f, one);
  return v;
}

Outcome gamma_check(const RunConfig& cfg) {
  const auto pairs = random_pairs(cfg, cfg.count("pairs"));
  const auto draws = cfg.count("draws");
  const auto samples = cfg.count("samples");
  const double tol = cfg.real("tolerance");
  const double sigma = cfg.real("sigma");
  Outcome o;
  Table rows;
  double worst = 0.0;
  std::size_t mean_failures = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [f, g] = pairs[k];
    const VectorKernel vf = as_point_kernel(f), vg = as_point_kernel(g);
    const GammaDecomposition dec = gamma_decompose(vf, vg);
    double max_res = 0.0;
    for (std::size_t d = 0; d < draws; ++d) {
      const auto draw = GaussianDraw::sample(f.truncation(), cfg.seed, 1 + k * draws + d);
      const double lhs = malliavin_gamma(f, g, draw);
      const double rhs = sample_decomposition(dec, draw, std::min(f.order(), g.order()))(0, 0);
      max_res = std::max(max_res, std::abs(lhs - rhs));
    }
    worst = std::max(worst, max_res);
    const McEstimate mean = malliavin_gamma_mc(f, g, samples, derive_seed(cfg.seed, 5000 + k));
    const double scale = apply_neg_Linv(g.order());
    const double cov = covariance_tensor(vf, vg).matrix(0, 0);
    const bool mean_ok =
        std::abs(scale * mean.estimate - cov) <= sigma * scale * mean.standard_error + 1e-12;
    mean_failures += mean_ok ? 0 : 1;
    rows.push_back({{"pair", k}, {"p", f.order()}, {"q", g.order()}, {"max_residual", max_res},
                    {"gamma_mean", scale * mean.estimate},
                    {"standard_error", scale * mean.standard_error}, {"covariance", cov},
                    {"pass", max_res <= tol && mean_ok}});
  }

  HermiteModelConfig hm;
  hm.p = static_cast<int>(cfg.count("hermite_p"));
  hm.n = static_cast<Index>(cfg.count("hermite_n"));
  hm.modes = cfg.count("M");
  hm.steps = cfg.count("G");
  hm.horizon = cfg.real("T");
  hm.validate();
  const VectorKernel fn = build_kernel(hm);
  const DeviationReport report = gamma_deviation_bound(fn, fn);

  o.pass = worst <= tol && mean_failures == 0;
  o.summary = {{"pairs", pairs.size()}, {"max_residual", worst}, {"tolerance", tol},
               {"mean_failures", mean_failures}, {"hermite_deviation_bound", report.total}};
  o.artifacts.push_back(table_artifact(cfg, "gamma-check",
                                       {"pair", "p", "q", "max_residual", "gamma_mean",
                                        "standard_error", "covariance", "pass"},
                                       rows));
  json breakdown = to_json(report);
  breakdown["model"] = hm.to_json();
  o.artifacts.push_back(json_artifact(cfg, "gamma-breakdown.json", std::move(breakdown)));
  return o;
}

Outcome reg_check(const RunConfig& cfg) {
  const double horizon = cfg.real("T");
  const auto steps = cfg.count("steps");
  const auto samples = cfg.count("samples");
  auto eps = cfg.reals("epsilons");
  require(eps.size() >= 2, "reg-check: need at least two epsilons");
  std::sort(eps.rbegin(), eps.rend());
  const double lo = cfg.real("ratio_low");
  const double hi = cfg.real("ratio_high");
  Outcome o;
  Table rows;
  const PathSampler bm = brownian_sampler(horizon, steps);
  std::vector<double> gaps;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const auto rep = regularization_gap_mc(bm, eps[i], samples, cfg.seed);
    gaps.push_back(rep.mean_sup_gap);
    rows.push_back({{"epsilon", eps[i]}, {"mean_sup_gap", rep.mean_sup_gap},
                    {"standard_error", rep.standard_error}, {"samples", rep.samples}});
  }
  json ratios = json::array();
  bool scaling_ok = true;
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i) {
    // gap ~ eps^{1/2}: ratio of consecutive gaps ~ (eps_i / eps_{i+1})^{1/2}
    const double expected = std::sqrt(eps[i] / eps[i + 1]);
    const double ratio = gaps[i] / gaps[i + 1];
    const bool ok = ratio >= lo * expected && ratio <= hi * expected;
    scaling_ok = scaling_ok && ok;
    ratios.push_back({{"from", eps[i]}, {"to", eps[i + 1]}, {"ratio", ratio},
                      {"expected", expected}, {"pass", ok}});
  }

  // Piecewise-linear fixtures: the sup gap never exceeds the modulus.
  GaussianStream rng(cfg.seed, 77);
  std::size_t fixture_failures = 0;
  const std::size_t fixtures = cfg.count("fixtures");
  for (std::size_t k = 0; k < fixtures; ++k) {
    const std::size_t g = 2 + k % 12;
    std::vector<double> v(g + 1);
    for (double& x : v) x = rng();
    const PathVector path(horizon, g, 1, v);
    for (double e : {0.01, 0.07, 0.2, 0.5, 1.3}) {
      const double eps_k = e * horizon;
      if (sup_distance(regularize(path, eps_k), path) > modulus_of_continuity(path, eps_k))
        ++fixture_failures;
    }
  }
  o.pass = scaling_ok && fixture_failures == 0;
  o.summary = {{"ratios", ratios}, {"fixtures", fixtures},
               {"fixture_failures", fixture_failures}};
  o.artifacts.push_back(table_artifact(cfg, "reg-check",
                                       {"epsilon", "mean_sup_gap", "standard_error", "samples"},
                                       rows));
  return o;
}

Outcome bound_cert(const RunConfig& cfg) {
  Outcome o;
  const std::string verify = cfg.str("verify");
  if (!verify.empty()) {
    std::ifstream in(verify);
    if (!in) throw ConfigError("cannot open certificate " + verify);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("certificate " + verify + ": " + e.what());
    }
    json list = doc.contains("certificates") ? doc["certificates"] : json::array({doc});
    std::size_t verified = 0;
    json rejected = json::array();
    for (const auto& c : list) {
      try {
        certificate_from_json(c);
        ++verified;
      } catch (const DomainError& e) {
        rejected.push_back(e.what());
      }
    }
    o.pass = rejected.empty();
    o.summary = {{"verified", verified}, {"rejected", rejected}, {"file", verify}};
    return o;
  }

  HermiteModelConfig hm;
  hm.p = static_cast<int>(cfg.count("p"));
  hm.n = static_cast<Index>(cfg.count("n"));
  hm.modes = cfg.count("M");
  hm.steps = cfg.count("G");
  hm.horizon = cfg.real("T");
  hm.seed = cfg.seed;
  hm.validate();
  const double d = 1.0;
  const double eps = cfg.real("epsilon");
  const double alpha = cfg.real("alpha");
  const auto reg_samples = cfg.count("reg_samples");

  const KLSystem kl = kl_system(hm.horizon, hm.modes, hm.steps);
  const VectorKernel f = build_kernel(hm, kl);
  const McEstimate sd = estimate_sd(1, cfg.count("sd_samples"), cfg.count("sd_steps"),
                                    derive_seed(cfg.seed, 1));
  const double deviation = gamma_deviation_bound(f, f).total;
  const auto reg_x = regularization_gap_mc(hermite_sampler(hm, kl), eps, reg_samples,
                                           derive_seed(cfg.seed, 2));
  const auto reg_z = regularization_gap_mc(kl_brownian_sampler(kl), eps, reg_samples,
                                           derive_seed(cfg.seed, 3));
  double gap_constant = cfg.real("gap_constant");
  if (gap_constant <= 0.0)
    gap_constant = std::max(reg_x.mean_sup_gap, reg_z.mean_sup_gap) / std::pow(eps, alpha);
  const std::string mode_name = cfg.str("holder_mode");
  if (mode_name != "optimized" && mode_name != "printed")
    throw ConfigError("holder_mode must be 'optimized' or 'printed'");

  const Eigen::MatrixXd r_f = covariance_tensor(f, f).matrix;
  const Eigen::MatrixXd r_z = kl_covariance(kl);
  std::vector<BoundCertificate> certs = {
      dbl_bound_regularized(reg_x.mean_sup_gap, reg_z.mean_sup_gap, deviation, eps, hm.horizon,
                            d, sd.estimate),
      dbl_bound_holder(gap_constant, alpha, hm.horizon, d, sd.estimate, deviation,
                       mode_name == "optimized" ? HolderMode::optimized : HolderMode::printed),
      dbl_contraction_rate_bound(f, r_f, r_z, cfg.real("beta"), gap_constant, hm.horizon, d,
                                 sd.estimate),
      hilbert_contraction_bound(f, r_f, r_z)};

  json list = json::array();
  Table rows;
  std::size_t verified = 0;
  for (const auto& c : certs) {
    json j = to_json(c);
    // Round trip through text, as a consumer would read it.
    if (verify_certificate(certificate_from_json(json::parse(j.dump())))) ++verified;
    list.push_back(j);
    rows.push_back({{"bound_name", c.bound_name}, {"total", c.total}});
  }
  const auto lp = lp_bl_convert(0.0, certs.front().total);
  o.pass = verified == certs.size();
  o.summary = {{"verified", verified},
               {"certificates", certs.size()},
               {"rho_inf_bound", rho_inf_bound(deviation)},
               {"d_lp_interval", {lp.first, lp.second}},
               {"s_d", sd.estimate},
               {"s_d_standard_error", sd.standard_error},
               {"model", hm.to_json()}};
  o.artifacts.push_back(json_artifact(cfg, "certificates.json", {{"certificates", list}}));
  o.artifacts.push_back(table_artifact(cfg, "bound-cert", {"bound_name", "total"}, rows));
  return o;
}

EmpiricalMeasure random_measure(std::size_t atoms, std::size_t steps, double scale,
                                GaussianStream& rng) {
  std::vector<PathVector> out;
  for (std::size_t a = 0; a < atoms; ++a) {
    std::vector<double> v(steps + 1);
    for (double& x : v) x = scale * rng();
    out.emplace_back(1.0, steps, 1, std::move(v));
  }
  return EmpiricalMeasure(std::move(out));
}

Outcome metric_oracle(const RunConfig& cfg) {
  const auto instances = cfg.count("instances");
  const auto max_atoms = cfg.count("max_atoms");
  const auto steps = cfg.count("steps");
  const double scale = cfg.real("scale");
  const double tol = cfg.real("tolerance");
  require(max_atoms <= 4, "metric-oracle: max_atoms must be at most 4");
  GaussianStream rng(cfg.seed, 0);
  Outcome o;
  Table rows;
  double worst = 0.0;
  for (std::size_t k = 0; k < instances; ++k) {
    const std::size_t a = 1 + k % max_atoms;
    const std::size_t b = 1 + (k / max_atoms) % max_atoms;
    const auto mu = random_measure(a, steps, scale, rng);
    const auto nu = random_measure(b, steps, scale, rng);
    const auto cost = truncated_cost(mu, nu);
    const double lp = transport_uniform(cost, a, b);
    const double oracle = transport_by_enumeration(cost, a, b);
    worst = std::max(worst, std::abs(lp - oracle));
    rows.push_back({{"instance", k}, {"atoms_mu", a}, {"atoms_nu", b}, {"lp", lp},
                    {"oracle", oracle}, {"abs_diff", std::abs(lp - oracle)}});
  }
  double triangle = 0.0, symmetry = 0.0;
  for (std::size_t k = 0; k < cfg.count("triples"); ++k) {
    const auto x = random_measure(1 + k % 5, steps, scale, rng);
    const auto y = random_measure(1 + (k + 2) % 5, steps, scale, rng);
    const auto z = random_measure(1 + (k + 4) % 5, steps, scale, rng);
    const double xy = empirical_dbl(x, y), yx = empirical_dbl(y, x);
    const double xz = empirical_dbl(x, z), yz = empirical_dbl(y, z);
    symmetry = std::max(symmetry, std::abs(xy - yx));
    triangle = std::max(triangle, xz - xy - yz);
  }
  o.pass = worst <= tol && symmetry <= tol && triangle <= tol;
  o.summary = {{"instances", instances}, {"max_abs_diff", worst},
               {"max_symmetry_defect", symmetry}, {"max_triangle_excess", std::max(0.0, triangle)},
               {"tolerance", tol}};

  const std::string mu_file = cfg.str("mu"), nu_file = cfg.str("nu");
  if (!mu_file.empty() || !nu_file.empty()) {
    if (mu_file.empty() || nu_file.empty()) throw ConfigError("metric-oracle: set both mu and nu");
    const auto mu = read_samples_csv(mu_file, cfg.real("T"));
    const auto nu = read_samples_csv(nu_file, cfg.real("T"));
    const bool exact = std::max(mu.size(), nu.size()) <= cfg.count("exact_threshold");
    const double value = exact ? empirical_dbl(mu, nu)
                               : sliced_dbl_lower(mu, nu, cfg.count("directions"), cfg.seed);
    o.summary["samples_dbl"] = value;
    o.summary["samples_method"] = exact ? "exact" : "sliced lower bound";
  }
  o.artifacts.push_back(table_artifact(
      cfg, "metric-oracle", {"instance", "atoms_mu", "atoms_nu", "lp", "oracle", "abs_diff"},
      rows));
  return o;
}

Outcome hermite_rate(const RunConfig& cfg) {
  HermiteModelConfig hm;
  hm.p = static_cast<int>(cfg.count("p"));
  hm.modes = cfg.count("M");
  hm.steps = cfg.count("G");
  hm.horizon = cfg.real("T");
  hm.seed = cfg.seed;
  std::vector<Index> ns;
  for (double v : cfg.reals("n_list")) {
    if (v < 1 || v != std::floor(v)) throw ConfigError("n_list entries must be positive integers");
    ns.push_back(static_cast<Index>(v));
  }
  hm.n = ns.front();
  hm.validate();
  RateOptions opt;
  opt.beta = cfg.real("beta");
  opt.empirical_samples = static_cast<std::size_t>(cfg.integer("samples"));
  opt.directions = cfg.count("directions");
  opt.exact_threshold = static_cast<std::size_t>(cfg.integer("exact_threshold"));
  opt.sd_samples = cfg.count("sd_samples");
  opt.sd_steps = cfg.count("sd_steps");
  opt.gap_samples = cfg.count("gap_samples");

  const RateTable t = rate_experiment(hm, ns, opt);
  const double target_cert = -opt.beta / (3.0 * opt.beta + 2.0) / 2.0;
  const bool cert_ok = std::abs(t.certificate_slope - target_cert) <=
                       cfg.real("cert_tolerance") * std::abs(target_cert);
  const bool dev_ok = std::abs(t.deviation_slope + 0.5) <= cfg.real("dev_tolerance") * 0.5;
  Outcome o;
  o.pass = cert_ok && dev_ok;
  o.summary = {{"certificate_slope", t.certificate_slope},
               {"certificate_target", target_cert},
               {"deviation_slope", t.deviation_slope},
               {"deviation_target", -0.5},
               {"empirical_slope", t.empirical_slope},
               {"s_d", t.s_d},
               {"s_d_standard_error", t.s_d_se},
               {"gap_constant", t.gap_constant},
               {"empirical_method", opt.empirical_samples <= opt.exact_threshold
                                        ? "exact"
                                        : "sliced lower bound"}};
  Table rows;
  json certs = json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"n", r.n}, {"deviation_bound", r.deviation_bound},
                    {"certificate_total", r.certificate_total}, {"empirical_dbl", r.empirical_dbl},
                    {"noise_floor", r.noise_floor}, {"seeds", r.seed}});
    certs.push_back({{"n", r.n}, {"certificate", r.certificate}});
  }
  o.artifacts.push_back(table_artifact(cfg, "hermite-rate",
                                       {"n", "deviation_bound", "certificate_total",
                                        "empirical_dbl", "noise_floor", "seeds"},
                                       rows));
  o.artifacts.push_back(json_artifact(cfg, "hermite-rate-certificates.json", {{"certificates", certs}}));
  return o;
}

using Handler = Outcome (*)(const RunConfig&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"isometry-check", isometry_check}, {"product-check", product_check},
      {"gamma-check", gamma_check},       {"reg-check", reg_check},
      {"bound-cert", bound_cert},         {"metric-oracle", metric_oracle},
      {"hermite-rate", hermite_rate}};
  return h;
}

}  // namespace

// ------------------------------------------------------------- config

nlohmann::json RunConfig::to_json() const {
  json params_json = json::object();
  for (const auto& [k, v] : params) params_json[k] = v;
  return {{"subcommand", subcommand}, {"seed", seed}, {"format", format}, {"params", params_json}};
}

std::string RunConfig::str(const std::string& key) const {
  auto it = params.find(key);
  if (it == params.end()) throw ConfigError("missing configuration key '" + key + "'");
  return it->second;
}

double RunConfig::real(const std::string& key) const {
  const std::string s = str(key);
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + s + "'");
  }
}

long long RunConfig::integer(const std::string& key) const {
  const std::string s = str(key);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + s + "'");
  }
}

std::size_t RunConfig::count(const std::string& key) const {
  const long long v = integer(key);
  if (v < 1) throw ConfigError("key '" + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::vector<double> RunConfig::reals(const std::string& key) const {
  std::vector<double> out;
  std::stringstream ss(str(key));
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': bad list entry '" + cell + "'");
    }
  }
  if (out.empty()) throw ConfigError("key '" + key + "' must be a nonempty list");
  return out;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"isometry-check", "product-check", "gamma-check",
                                                 "reg-check",      "bound-cert",    "metric-oracle",
                                                 "hermite-rate"};
  return names;
}

const std::map<std::string, std::string>& defaults(const std::string& subcommand) {
  static const std::map<std::string, std::map<std::string, std::string>> table = {
      {"isometry-check",
       {{"kernels", "20"}, {"max_order", "4"}, {"truncation", "6"}, {"entries", "6"},
        {"samples", "100000"}, {"sigma", "3"}}},
      {"product-check",
       {{"pairs", "20"}, {"draws", "100"}, {"max_order", "3"}, {"truncation", "5"},
        {"entries", "4"}, {"tolerance", "1e-8"}}},
      {"gamma-check",
       {{"pairs", "20"}, {"draws", "100"}, {"max_order", "3"}, {"truncation", "5"},
        {"entries", "4"}, {"tolerance", "1e-8"}, {"samples", "20000"}, {"sigma", "3"},
        {"hermite_p", "2"}, {"hermite_n", "16"}, {"M", "50"}, {"G", "50"}, {"T", "1"}}},
      {"reg-check",
       {{"T", "1"}, {"steps", "1000"}, {"samples", "2000"}, {"epsilons", "0.2,0.1,0.05"},
        {"ratio_low", "0.8"}, {"ratio_high", "1.2"}, {"fixtures", "40"}}},
      {"bound-cert",
       {{"p", "2"}, {"n", "256"}, {"M", "50"}, {"G", "100"}, {"T", "1"}, {"epsilon", "0.1"},
        {"alpha", "0.5"}, {"beta", "0.5"}, {"gap_constant", "0"}, {"holder_mode", "optimized"},
        {"reg_samples", "400"}, {"sd_samples", "20000"}, {"sd_steps", "1000"}, {"verify", ""}}},
      {"metric-oracle",
       {{"instances", "50"}, {"max_atoms", "4"}, {"steps", "4"}, {"scale", "0.7"},
        {"tolerance", "1e-9"}, {"triples", "50"}, {"mu", ""}, {"nu", ""}, {"T", "1"},
        {"exact_threshold", "500"}, {"directions", "32"}}},
      {"hermite-rate",
       {{"p", "2"}, {"n_list", "16,32,64,128,256,512,1024,2048,4096"}, {"M", "50"},
        {"G", "100"}, {"T", "1"}, {"beta", "0.5"}, {"samples", "1000"}, {"directions", "32"},
        {"exact_threshold", "500"}, {"sd_samples", "20000"}, {"sd_steps", "1000"},
        {"gap_samples", "400"}, {"cert_tolerance", "0.15"}, {"dev_tolerance", "0.10"}}},
  };
  auto it = table.find(subcommand);
  if (it == table.end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  return it->second;
}

std::map<std::string, std::string> parse_config_text(const std::string& text,
                                                     const std::string& origin) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

RunConfig parse_args(const std::vector<std::string>& args) {
  CLI::App app{"chaosbound"};
  std::string subcommand, config_file, format;
  std::uint64_t seed = 1;
  std::string out = ".";
  std::vector<std::string> sets;
  app.add_option("subcommand", subcommand, "one of: isometry-check, product-check, gamma-check, "
                                           "reg-check, bound-cert, metric-oracle, hermite-rate")
      ->required();
  auto* config_opt = app.add_option("--config", config_file, "key = value configuration file");
  auto* seed_opt = app.add_option("--seed", seed, "master seed");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "table format: csv or json");
  app.add_option("--set", sets, "override one key: --set key=value");
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  RunConfig cfg;
  cfg.subcommand = subcommand;
  cfg.params = defaults(subcommand);
  std::map<std::string, std::string> file_values;
  if (*config_opt) {
    std::ifstream in(config_file);
    if (!in) throw ConfigError("cannot read config file " + config_file);
    std::stringstream buf;
    buf << in.rdbuf();
    file_values = parse_config_text(buf.str(), config_file);
  }
  // seed, out and format may also come from the file; flags win.
  auto take = [&](const std::string& key, std::string& target) {
    auto it = file_values.find(key);
    if (it == file_values.end()) return false;
    target = it->second;
    file_values.erase(it);
    return true;
  };
  std::string file_seed, file_out, file_format;
  const bool has_file_seed = take("seed", file_seed);
  const bool has_file_out = take("out", file_out);
  const bool has_file_format = take("format", file_format);

  auto apply = [&](const std::map<std::string, std::string>& values, const std::string& origin) {
    for (const auto& [k, v] : values) {
      if (!cfg.params.count(k))
        throw ConfigError(origin + ": unknown key '" + k + "' for " + subcommand);
      cfg.params[k] = v;
    }
  };
  apply(file_values, config_file);
  std::map<std::string, std::string> set_values;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    set_values[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  apply(set_values, "--set");

  if (*seed_opt) {
    cfg.seed = seed;
  } else if (has_file_seed) {
    try {
      std::size_t used = 0;
      cfg.seed = std::stoull(file_seed, &used);
      if (used != file_seed.size()) throw std::invalid_argument(file_seed);
    } catch (const std::exception&) {
      throw ConfigError("seed must be a nonnegative integer, got '" + file_seed + "'");
    }
  }
  cfg.out = out != "." || !has_file_out ? out : file_out;
  if (format.empty()) format = has_file_format ? file_format : "";
  if (format.empty()) format = subcommand == "hermite-rate" ? "csv" : "json";
  if (format != "csv" && format != "json")
    throw ConfigError("--format must be csv or json, got '" + format + "'");
  cfg.format = format;
  return cfg;
}

Outcome execute(const RunConfig& cfg) {
  auto it = handlers().find(cfg.subcommand);
  if (it == handlers().end()) throw ConfigError("unknown subcommand '" + cfg.subcommand + "'");
  Outcome o = it->second(cfg);
  o.summary["subcommand"] = cfg.subcommand;
  o.summary["pass"] = o.pass;
  o.summary["config"] = cfg.to_json();
  o.artifacts.push_back({cfg.subcommand + "-summary.json", o.summary.dump(2) + "\n"});
  return o;
}

void write_artifacts(const RunConfig& cfg, const Outcome& outcome) {
  std::filesystem::create_directories(cfg.out);
  for (const auto& a : outcome.artifacts) {
    const auto final_path = cfg.out / a.name;
    auto tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream f(tmp, std::ios::binary);
      if (!f) throw std::runtime_error("cannot write " + tmp.string());
      f << a.content;
      if (!f) throw std::runtime_error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, final_path);
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = parse_args(args);
  } catch (const CLI::CallForHelp&) {
    out << "usage: chaosbound <subcommand> [--config FILE] [--seed N] [--out DIR] "
           "[--format csv|json] [--set key=value]...\n\nsubcommands and keys:\n";
    for (const auto& s : subcommands()) {
      out << "  " << s << "\n";
      for (const auto& [k, v] : defaults(s)) out << "      " << k << " = " << v << "\n";
    }
    return kPass;
  } catch (const std::exception& e) {
    err << "chaosbound: configuration error: " << e.what() << "\n";
    return kConfigError;
  }
  try {
    const Outcome o = execute(cfg);
    write_artifacts(cfg, o);
    out << o.summary.dump(2) << "\n";
    return o.pass ? kPass : kCheckFailed;
  } catch (const ConfigError& e) {
    err << "chaosbound " << cfg.subcommand << ": configuration error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    err << "chaosbound " << cfg.subcommand << ": invalid parameter: " << e.what() << "\n";
    return kConfigError;
  } catch (const SolverError& e) {
    err << "chaosbound " << cfg.subcommand << ": solver failure: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    err << "chaosbound " << cfg.subcommand << ": " << e.what() << "\n";
    return kSolverError;
  }
}

}  // namespace chaosbound::cli
