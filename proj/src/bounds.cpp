#include "chaosbound/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "chaosbound/errors.hpp"
#include "chaosbound/gamma.hpp"

namespace chaosbound {
namespace {

using nlohmann::json;

double factorial(int p) {
  double f = 1.0;
  for (int i = 2; i <= p; ++i) f *= i;
  return f;
}

double k_td(double horizon, double d, double s_d) {
  return 4.0 * (horizon + 2.0) * (std::sqrt(horizon) * s_d + std::sqrt(d));
}

void require_nonnegative(double v, const char* name) {
  require(std::isfinite(v) && v >= 0.0, std::string(name) + " must be finite and nonnegative");
}

void require_positive(double v, const char* name) {
  require(std::isfinite(v) && v > 0.0, std::string(name) + " must be finite and positive");
}

double optimized_holder_constant(double m, double alpha, double k) {
  const double e = alpha / (3.0 * alpha + 2.0);
  return m * (2.0 + 3.0 * alpha) * std::pow(2.0 * m * alpha, -3.0 * e) * std::pow(k, e);
}

Provenance provenance_from(const std::string& s) {
  if (s == "formula") return Provenance::formula;
  if (s == "derived") return Provenance::derived;
  if (s == "estimated") return Provenance::estimated;
  throw DomainError("certificate: unknown provenance '" + s + "'");
}

}  // namespace

McEstimate estimate_sd(std::size_t d, std::size_t samples, std::size_t steps, std::uint64_t seed) {
  require(d >= 1 && samples >= 1 && steps >= 1, "estimate_sd: d, N and steps must be positive");
  const std::size_t chunk = 1024;
  std::vector<RunningStats> stats(chunk_count(samples, chunk));
  const double sd = std::sqrt(1.0 / static_cast<double>(steps));
  parallel_chunks(samples, chunk, [&](std::size_t c, std::size_t begin, std::size_t end) {
    GaussianStream rng(seed, c);
    std::vector<double> pos(d);
    for (std::size_t s = begin; s < end; ++s) {
      std::fill(pos.begin(), pos.end(), 0.0);
      double best = 0.0;
      for (std::size_t i = 0; i < steps; ++i) {
        double norm2 = 0.0;
        for (double& x : pos) {
          x += sd * rng();
          norm2 += x * x;
        }
        best = std::max(best, norm2);
      }
      stats[c].push(std::sqrt(best));
    }
  });
  RunningStats all;
  for (const auto& s : stats) all.merge(s);
  return all.summary();
}

double c_td(double horizon, double d, double s_d) {
  require_positive(horizon, "T");
  require_positive(d, "d");
  require_nonnegative(s_d, "s_d");
  return 1.5 * std::cbrt(k_td(horizon, d, s_d));
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::formula: return "formula";
    case Provenance::derived: return "derived";
    case Provenance::estimated: return "estimated";
  }
  return "unknown";
}

double BoundCertificate::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t.value;
  throw DomainError("certificate " + bound_name + " has no term '" + name + "'");
}

json to_json(const BoundCertificate& c) {
  json terms = json::array();
  for (const auto& t : c.terms)
    terms.push_back({{"name", t.name}, {"value", t.value}, {"provenance", provenance_name(t.provenance)}});
  json j = {{"bound_name", c.bound_name}, {"inputs", c.inputs}, {"terms", std::move(terms)},
            {"total", c.total}, {"paper_ref", c.paper_ref}};
  if (!c.composition.empty()) j["composition"] = c.composition;
  return j;
}

BoundCertificate certificate_from_json(const json& j) {
  BoundCertificate c;
  try {
    c.bound_name = j.at("bound_name").get<std::string>();
    c.inputs = j.at("inputs");
    for (const auto& t : j.at("terms"))
      c.terms.push_back({t.at("name").get<std::string>(), t.at("value").get<double>(),
                         provenance_from(t.at("provenance").get<std::string>())});
    c.total = j.at("total").get<double>();
    c.paper_ref = j.at("paper_ref").get<std::string>();
    c.composition = j.value("composition", std::string());
  } catch (const json::exception& e) {
    throw DomainError(std::string("certificate JSON: ") + e.what());
  }
  if (!verify_certificate(c))
    throw DomainError("certificate " + c.bound_name + ": recorded total " +
                      std::to_string(c.total) + " does not match its inputs");
  return c;
}

BoundCertificate recompute(const BoundCertificate& c) {
  const json& in = c.inputs;
  try {
    if (c.bound_name == "dbl_regularized")
      return dbl_bound_regularized(in.at("reg_x"), in.at("reg_z"), in.at("deviation"),
                                   in.at("epsilon"), in.at("T"), in.at("d"), in.at("s_d"));
    if (c.bound_name == "dbl_holder") {
      const auto mode = in.at("mode").get<std::string>();
      require(mode == "optimized" || mode == "printed", "certificate: unknown holder mode");
      return dbl_bound_holder(in.at("M"), in.at("alpha"), in.at("T"), in.at("d"), in.at("s_d"),
                              in.at("deviation"),
                              mode == "optimized" ? HolderMode::optimized : HolderMode::printed);
    }
    if (c.bound_name == "dbl_contraction_rate") {
      ContractionRateInputs r{in.at("beta"),
                              in.at("M"),
                              in.at("T"),
                              in.at("d"),
                              in.at("s_d"),
                              in.at("p"),
                              in.at("trace_deviation"),
                              in.at("contraction_norms").get<std::vector<double>>()};
      return contraction_rate_certificate(r);
    }
    if (c.bound_name == "hilbert_contraction")
      return hilbert_contraction_certificate(in.at("p"), in.at("trace_deviation"),
                                             in.at("contraction_norms").get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw DomainError("certificate " + c.bound_name + ": bad inputs: " + e.what());
  }
  throw DomainError("certificate: unknown bound_name '" + c.bound_name + "'");
}

bool verify_certificate(const BoundCertificate& c, double rel_tol) {
  const BoundCertificate fresh = recompute(c);
  auto close = [&](double a, double b) {
    return std::abs(a - b) <= rel_tol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
  };
  if (!close(fresh.total, c.total) || fresh.terms.size() != c.terms.size()) return false;
  for (std::size_t i = 0; i < c.terms.size(); ++i)
    if (fresh.terms[i].name != c.terms[i].name || !close(fresh.terms[i].value, c.terms[i].value))
      return false;
  return true;
}

BoundCertificate dbl_bound_regularized(double reg_x, double reg_z, double deviation,
                                       double epsilon, double horizon, double d, double s_d) {
  require_nonnegative(reg_x, "reg_x");
  require_nonnegative(reg_z, "reg_z");
  require_nonnegative(deviation, "deviation");
  require_positive(epsilon, "epsilon");
  const double c = c_td(horizon, d, s_d);
  const double smoothing = c * std::pow(epsilon, -2.0 / 3.0) * std::cbrt(deviation);
  BoundCertificate cert;
  cert.bound_name = "dbl_regularized";
  cert.paper_ref = "regularized smart-path bound on d_BL";
  cert.inputs = {{"reg_x", reg_x}, {"reg_z", reg_z}, {"deviation", deviation},
                 {"epsilon", epsilon}, {"T", horizon}, {"d", d}, {"s_d", s_d}};
  cert.terms = {{"reg_x", reg_x, Provenance::estimated},
                {"reg_z", reg_z, Provenance::estimated},
                {"C_Td", c, Provenance::formula},
                {"smoothing", smoothing, Provenance::formula}};
  cert.total = reg_x + reg_z + smoothing;
  cert.composition = "reg_x + reg_z + C_Td * epsilon^(-2/3) * deviation^(1/3)";
  return cert;
}

double holder_optimal_epsilon(double gap_constant, double alpha, double horizon, double d,
                              double s_d, double deviation) {
  require_positive(gap_constant, "M");
  require_positive(alpha, "alpha");
  require_positive(deviation, "deviation");
  const double base = std::cbrt(k_td(horizon, d, s_d) * deviation) / (2.0 * gap_constant * alpha);
  return std::pow(base, 3.0 / (3.0 * alpha + 2.0));
}

BoundCertificate dbl_bound_holder(double gap_constant, double alpha, double horizon, double d,
                                  double s_d, double deviation, HolderMode mode) {
  require_positive(gap_constant, "M");
  require_positive(alpha, "alpha");
  require_nonnegative(deviation, "deviation");
  c_td(horizon, d, s_d);  // validates T, d, s_d
  const double k = k_td(horizon, d, s_d);
  double constant = 0.0;
  double exponent = 0.0;
  if (mode == HolderMode::optimized) {
    exponent = alpha / (3.0 * alpha + 2.0);
    constant = optimized_holder_constant(gap_constant, alpha, k);
  } else {
    exponent = alpha / (alpha + 2.0 / 3.0);
    constant = gap_constant * (2.0 + 3.0 * alpha) /
               (2.0 * std::pow(gap_constant * alpha, 3.0 * alpha / (3.0 * alpha + 2.0))) *
               std::pow(k, exponent);
  }
  BoundCertificate cert;
  cert.bound_name = "dbl_holder";
  cert.paper_ref = "Hoelder-optimized bound on d_BL";
  cert.inputs = {{"M", gap_constant}, {"alpha", alpha}, {"T", horizon}, {"d", d},
                 {"s_d", s_d}, {"deviation", deviation},
                 {"mode", mode == HolderMode::optimized ? "optimized" : "printed"}};
  cert.terms = {{"constant", constant,
                 mode == HolderMode::optimized ? Provenance::derived : Provenance::formula},
                {"exponent", exponent,
                 mode == HolderMode::optimized ? Provenance::derived : Provenance::formula}};
  if (mode == HolderMode::optimized && deviation > 0.0)
    cert.terms.push_back({"optimal_epsilon",
                          holder_optimal_epsilon(gap_constant, alpha, horizon, d, s_d, deviation),
                          Provenance::derived});
  cert.total = deviation == 0.0 ? 0.0 : constant * std::pow(deviation, exponent);
  cert.composition = "constant * deviation^exponent";
  return cert;
}

BoundCertificate contraction_rate_certificate(const ContractionRateInputs& in) {
  require(in.beta > 0.0 && in.beta <= 1.0, "contraction rate bound: beta must lie in (0, 1]");
  require_positive(in.gap_constant, "M");
  require(in.p >= 1, "contraction rate bound: p must be positive");
  require(in.contraction_norms.size() == static_cast<std::size_t>(in.p - 1),
          "contraction rate bound: need one contraction norm per r = 1..p-1");
  require_nonnegative(in.trace_deviation, "trace deviation");
  c_td(in.horizon, in.d, in.s_d);

  const double alpha = in.beta / (3.0 * in.beta + 2.0);
  const double constant =
      optimized_holder_constant(in.gap_constant, in.beta, k_td(in.horizon, in.d, in.s_d));
  BoundCertificate cert;
  cert.bound_name = "dbl_contraction_rate";
  cert.paper_ref = "contraction-rate bound on d_BL for chaos elements";
  cert.inputs = {{"beta", in.beta}, {"M", in.gap_constant}, {"T", in.horizon}, {"d", in.d},
                 {"s_d", in.s_d}, {"p", in.p}, {"trace_deviation", in.trace_deviation},
                 {"contraction_norms", in.contraction_norms}};
  cert.terms.push_back({"alpha", alpha, Provenance::formula});
  cert.terms.push_back({"constant", constant, Provenance::derived});
  double sum = std::pow(in.trace_deviation, alpha);
  cert.terms.push_back({"covariance_term", constant * sum, Provenance::derived});
  for (int r = 1; r < in.p; ++r) {
    const double w = static_cast<double>(a_coeff(in.p, in.p, r)) *
                     std::sqrt(factorial(2 * in.p - 2 * r)) / in.p;
    const double part = std::pow(w * in.contraction_norms[static_cast<std::size_t>(r - 1)], alpha);
    sum += part;
    cert.terms.push_back({"contraction_term_r" + std::to_string(r), constant * part,
                          Provenance::derived});
  }
  cert.total = constant * sum;
  cert.composition =
      "The deviation is bounded by ||R_F - R_Z||_trace + sum_r w_r ||f (x)~_r f||_upper with "
      "w_r = a_{p,p,r} sqrt((2p-2r)!) / p (Hilbert-case isometry constants). The optimized "
      "Hoelder bound at exponent beta is applied to that sum and x^alpha is split termwise by "
      "subadditivity. The constant is explicit but not sharp.";
  return cert;
}

std::vector<double> self_contraction_norms(const VectorKernel& f) {
  std::vector<double> norms;
  for (int r = 1; r < f.order(); ++r)
    norms.push_back(projective_norm_upper(
        contract_vector(f, f, r, TermSelection::overlapping).symmetrized()));
  return norms;
}

BoundCertificate dbl_contraction_rate_bound(const VectorKernel& f, const Eigen::MatrixXd& r_f,
                                            const Eigen::MatrixXd& r_z, double beta,
                                            double gap_constant, double horizon, double d,
                                            double s_d) {
  require(r_f.rows() == r_z.rows() && r_f.cols() == r_z.cols(),
          "contraction rate bound: covariance shapes differ");
  return contraction_rate_certificate({beta, gap_constant, horizon, d, s_d, f.order(),
                                       trace_norm(r_f - r_z), self_contraction_norms(f)});
}

double rho_inf_bound(double deviation) {
  require_nonnegative(deviation, "deviation");
  return 0.5 * deviation;
}

BoundCertificate hilbert_contraction_certificate(int p, double trace_deviation,
                                                 const std::vector<double>& contraction_norms) {
  require(p >= 1, "hilbert contraction bound: p must be positive");
  require(contraction_norms.size() == static_cast<std::size_t>(p - 1),
          "hilbert contraction bound: need one contraction norm per r = 1..p-1");
  require_nonnegative(trace_deviation, "trace deviation");
  BoundCertificate cert;
  cert.bound_name = "hilbert_contraction";
  cert.paper_ref = "Hilbert-space contraction bound on rho_inf";
  cert.inputs = {{"p", p}, {"trace_deviation", trace_deviation},
                 {"contraction_norms", contraction_norms}};
  const double cov = 0.5 * trace_deviation;
  cert.terms.push_back({"covariance_term", cov, Provenance::formula});
  double total = cov;
  for (int r = 1; r < p; ++r) {
    const double part = std::sqrt(factorial(2 * p - 2 * r)) *
                        static_cast<double>(a_coeff(p, p, r)) *
                        contraction_norms[static_cast<std::size_t>(r - 1)] / (2.0 * p);
    require_nonnegative(part, "contraction norm");
    cert.terms.push_back({"contraction_term_r" + std::to_string(r), part, Provenance::formula});
    total += part;
  }
  cert.total = total;
  cert.composition = "covariance_term + sum_r contraction_term_r";
  return cert;
}

BoundCertificate hilbert_contraction_bound(const VectorKernel& f, const Eigen::MatrixXd& r_f,
                                           const Eigen::MatrixXd& r_z) {
  require(r_f.rows() == r_z.rows() && r_f.cols() == r_z.cols(),
          "hilbert contraction bound: covariance shapes differ");
  return hilbert_contraction_certificate(f.order(), trace_norm(r_f - r_z),
                                         self_contraction_norms(f));
}

std::pair<double, double> lp_bl_convert(double d_bl_low, double d_bl_high) {
  require_nonnegative(d_bl_low, "d_BL lower value");
  require(std::isfinite(d_bl_high) && d_bl_low <= d_bl_high,
          "lp_bl_convert: lower value exceeds upper value");
  return {0.5 * d_bl_low, 1.5 * d_bl_high};
}

}  // namespace chaosbound
