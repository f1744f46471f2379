#include "chaosbound/flatmetric.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "chaosbound/errors.hpp"

namespace chaosbound {
namespace {

constexpr double kCap = 2.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Concave piecewise-linear function on [0, 2] given by its breakpoints.
struct Concave {
  std::vector<double> x;
  std::vector<double> v;

  double at(double u) const {
    auto it = std::upper_bound(x.begin(), x.end(), u);
    if (it == x.begin()) return v.front();
    if (it == x.end()) return v.back();
    const std::size_t j = static_cast<std::size_t>(it - x.begin());
    const double w = (u - x[j - 1]) / (x[j] - x[j - 1]);
    return v[j - 1] + w * (v[j] - v[j - 1]);
  }

  void push(double px, double pv) {
    if (!x.empty() && px <= x.back()) {
      v.back() = std::max(v.back(), pv);
      return;
    }
    x.push_back(px);
    v.push_back(pv);
  }

  // u(f) = max of this over [f - gap, f + gap] intersected with [0, 2].
  Concave window_max(double gap) const {
    const std::size_t n = x.size();
    std::size_t l = 0;
    for (std::size_t j = 1; j < n; ++j)
      if (v[j] > v[l]) l = j;
    std::size_t r = l;
    while (r + 1 < n && v[r + 1] == v[l]) ++r;
    const double top = v[l];

    Concave out;
    if (x[l] - gap > 0.0) {
      out.push(0.0, at(gap));
      for (std::size_t j = 0; j <= l; ++j)
        if (x[j] - gap > 0.0) out.push(x[j] - gap, v[j]);
    } else {
      out.push(0.0, top);
    }
    if (x[r] + gap < kCap) {
      for (std::size_t j = r; j < n; ++j)
        if (x[j] + gap < kCap) out.push(x[j] + gap, v[j]);
      out.push(kCap, at(kCap - gap));
    } else {
      out.push(kCap, top);
    }
    return out;
  }

  void add_linear(double slope) {
    for (std::size_t j = 0; j < x.size(); ++j) v[j] += slope * x[j];
    // drop interior points where the slope does not change
    std::size_t k = 1;
    for (std::size_t j = 1; j + 1 < x.size(); ++j) {
      const double s1 = (v[j] - v[k - 1]) / (x[j] - x[k - 1]);
      const double s2 = (v[j + 1] - v[j]) / (x[j + 1] - x[j]);
      if (std::abs(s1 - s2) <= 1e-12 * (1.0 + std::abs(s1) + std::abs(s2))) continue;
      x[k] = x[j];
      v[k] = v[j];
      ++k;
    }
    x[k] = x.back();
    v[k] = v.back();
    x.resize(k + 1);
    v.resize(k + 1);
  }
};

void check_measures(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  require(mu[0].same_grid(nu[0]), "flat distance: measures live on different grids");
}

}  // namespace

EmpiricalMeasure::EmpiricalMeasure(std::vector<PathVector> atoms) : atoms_(std::move(atoms)) {
  require(!atoms_.empty(), "empirical measure needs at least one atom");
  for (const auto& a : atoms_)
    require(a.same_grid(atoms_.front()), "empirical measure atoms must share one grid");
}

std::vector<double> truncated_cost(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  check_measures(mu, nu);
  std::vector<double> cost(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j)
      cost[i * nu.size() + j] = std::min(sup_distance(mu[i], nu[j]), kCap);
  return cost;
}

double transport_uniform(std::span<const double> cost, std::size_t rows, std::size_t cols) {
  require(rows >= 1 && cols >= 1, "transport: empty marginal");
  require(cost.size() == rows * cols, "transport: cost matrix has the wrong size");
  for (double c : cost) require(std::isfinite(c) && c >= 0.0, "transport: costs must be finite and nonnegative");

  // Integer masses: every row carries cols/g units, every column rows/g.
  const std::size_t g = std::gcd(rows, cols);
  const auto row_mass = static_cast<std::int64_t>(cols / g);
  const auto col_mass = static_cast<std::int64_t>(rows / g);
  const double total_mass = static_cast<double>(rows) * static_cast<double>(row_mass);

  // Node layout: 0 = source, 1..rows, rows+1..rows+cols, sink.
  const std::size_t nodes = rows + cols + 2;
  const std::size_t sink = nodes - 1;
  auto row_node = [](std::size_t i) { return 1 + i; };
  auto col_node = [rows](std::size_t j) { return 1 + rows + j; };

  std::vector<std::int64_t> supply(rows, row_mass), demand(cols, col_mass);
  std::vector<std::int64_t> flow(rows * cols, 0);
  std::vector<double> potential(nodes, 0.0), dist(nodes);
  std::vector<std::size_t> parent(nodes);
  std::vector<char> done(nodes);
  std::int64_t remaining = static_cast<std::int64_t>(rows) * row_mass;

  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(done.begin(), done.end(), 0);
    dist[0] = 0.0;
    for (;;) {
      std::size_t u = nodes;
      double best = kInf;
      for (std::size_t k = 0; k < nodes; ++k)
        if (!done[k] && dist[k] < best) {
          best = dist[k];
          u = k;
        }
      if (u == nodes || u == sink) break;
      done[u] = 1;
      auto relax = [&](std::size_t w, double reduced) {
        const double cand = dist[u] + std::max(0.0, reduced);
        if (cand < dist[w]) {
          dist[w] = cand;
          parent[w] = u;
        }
      };
      if (u == 0) {
        for (std::size_t i = 0; i < rows; ++i)
          if (supply[i] > 0) relax(row_node(i), potential[0] - potential[row_node(i)]);
      } else if (u <= rows) {
        const std::size_t i = u - 1;
        for (std::size_t j = 0; j < cols; ++j)
          if (!done[col_node(j)])
            relax(col_node(j), cost[i * cols + j] + potential[u] - potential[col_node(j)]);
      } else {
        const std::size_t j = u - 1 - rows;
        for (std::size_t i = 0; i < rows; ++i)
          if (flow[i * cols + j] > 0 && !done[row_node(i)])
            relax(row_node(i), -cost[i * cols + j] + potential[u] - potential[row_node(i)]);
        if (demand[j] > 0) relax(sink, potential[u] - potential[sink]);
      }
    }
    if (!std::isfinite(dist[sink]))
      throw SolverError("transport: no augmenting path with " + std::to_string(remaining) +
                        " units unrouted");
    for (std::size_t k = 0; k < nodes; ++k) potential[k] += std::min(dist[k], dist[sink]);

    // Bottleneck along sink <- col <- row <- ... <- source.
    std::int64_t push = remaining;
    for (std::size_t w = sink; w != 0; w = parent[w]) {
      const std::size_t u = parent[w];
      if (w == sink) push = std::min(push, demand[u - 1 - rows]);
      else if (u == 0) push = std::min(push, supply[w - 1]);
      else if (u > rows) push = std::min(push, flow[(w - 1) * cols + (u - 1 - rows)]);
    }
    for (std::size_t w = sink; w != 0; w = parent[w]) {
      const std::size_t u = parent[w];
      if (w == sink) demand[u - 1 - rows] -= push;
      else if (u == 0) supply[w - 1] -= push;
      else if (u <= rows) flow[(u - 1) * cols + (w - 1 - rows)] += push;
      else flow[(w - 1) * cols + (u - 1 - rows)] -= push;
    }
    remaining -= push;
  }

  // Complementary slackness on the final potentials.
  double value = 0.0;
  double scale = 1.0;
  for (double c : cost) scale = std::max(scale, c);
  const double tol = 1e-9 * scale;
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double c = cost[i * cols + j];
      const double reduced = c + potential[row_node(i)] - potential[col_node(j)];
      const std::int64_t f = flow[i * cols + j];
      if (reduced < -tol || (f > 0 && std::abs(reduced) > tol))
        throw SolverError("transport: optimality check failed at (" + std::to_string(i) + ", " +
                          std::to_string(j) + "), reduced cost " + std::to_string(reduced));
      value += static_cast<double>(f) * c;
    }
  }
  return value / total_mass;
}

double transport_by_enumeration(std::span<const double> cost, std::size_t rows,
                                std::size_t cols) {
  require(rows >= 1 && cols >= 1 && rows * cols <= 20,
          "transport_by_enumeration: instance too large");
  require(cost.size() == rows * cols, "transport_by_enumeration: cost matrix has the wrong size");
  const std::size_t edges = rows * cols;
  const std::size_t pick = rows + cols - 1;
  double best = -kInf;
  std::vector<std::size_t> chosen;
  std::vector<double> pot(rows + cols);
  std::vector<char> known(rows + cols);
  for (std::uint32_t mask = 0; mask < (1u << edges); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != pick) continue;
    chosen.clear();
    for (std::size_t e = 0; e < edges; ++e)
      if (mask & (1u << e)) chosen.push_back(e);
    // Propagate u_i + v_j = c_ij from u_0 = 0; a spanning tree fixes all.
    std::fill(known.begin(), known.end(), 0);
    known[0] = 1;
    pot[0] = 0.0;
    for (bool grew = true; grew;) {
      grew = false;
      for (std::size_t e : chosen) {
        const std::size_t i = e / cols, j = rows + e % cols;
        if (known[i] && !known[j]) {
          pot[j] = cost[e] - pot[i];
          known[j] = grew = true;
        } else if (known[j] && !known[i]) {
          pot[i] = cost[e] - pot[j];
          known[i] = grew = true;
        }
      }
    }
    if (std::find(known.begin(), known.end(), 0) != known.end()) continue;
    bool feasible = true;
    for (std::size_t e = 0; e < edges && feasible; ++e)
      feasible = pot[e / cols] + pot[rows + e % cols] <= cost[e] + 1e-12;
    if (!feasible) continue;
    double value = 0.0;
    for (std::size_t i = 0; i < rows; ++i) value += pot[i] / static_cast<double>(rows);
    for (std::size_t j = 0; j < cols; ++j) value += pot[rows + j] / static_cast<double>(cols);
    best = std::max(best, value);
  }
  return best;
}

double empirical_dbl(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
  const auto cost = truncated_cost(mu, nu);
  return transport_uniform(cost, mu.size(), nu.size());
}

double dbl_1d(std::span<const double> xs, std::span<const double> ys) {
  require(!xs.empty() && !ys.empty(), "dbl_1d: empty sample");
  const std::size_t g = std::gcd(xs.size(), ys.size());
  const double wx = static_cast<double>(ys.size() / g);
  const double wy = static_cast<double>(xs.size() / g);
  const double total = static_cast<double>(xs.size()) * wx;

  std::vector<std::pair<double, double>> pts;
  pts.reserve(xs.size() + ys.size());
  for (double x : xs) pts.emplace_back(x, wx);
  for (double y : ys) pts.emplace_back(y, -wy);
  std::sort(pts.begin(), pts.end());
  std::vector<double> at, weight;
  for (const auto& [x, w] : pts) {
    require(std::isfinite(x), "dbl_1d: non-finite sample");
    if (!at.empty() && at.back() == x) {
      weight.back() += w;
    } else {
      at.push_back(x);
      weight.push_back(w);
    }
  }

  // Maximize sum w_k f_k over f_k in [0, 2] with |f_{k+1} - f_k| <= gap_k.
  Concave value;
  value.push(0.0, 0.0);
  value.push(kCap, kCap * weight[0]);
  for (std::size_t k = 1; k < at.size(); ++k) {
    value = value.window_max(at[k] - at[k - 1]);
    value.add_linear(weight[k]);
  }
  const double best = *std::max_element(value.v.begin(), value.v.end());
  return std::max(0.0, best / total);
}

std::vector<double> slice_direction(std::size_t index, std::size_t entries, std::size_t dim,
                                    std::uint64_t seed) {
  require(entries >= 1 && dim >= 1 && entries % dim == 0, "slice_direction: bad layout");
  std::vector<double> c(entries, 0.0);
  if (index == 0) {
    c[entries - dim] = 1.0;
    return c;
  }
  GaussianStream rng(seed, index);
  if (rng.uniform() < 0.5) {
    const auto k = std::min(entries - 1, static_cast<std::size_t>(rng.uniform() * entries));
    c[k] = rng.uniform() < 0.5 ? -1.0 : 1.0;
    return c;
  }
  double l1 = 0.0;
  for (double& v : c) {
    v = rng();
    l1 += std::abs(v);
  }
  for (double& v : c) v /= l1;
  return c;
}

double sliced_dbl_lower(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                        std::size_t directions, std::uint64_t seed) {
  require(directions >= 1, "sliced_dbl_lower: need at least one direction");
  check_measures(mu, nu);
  const std::size_t entries = mu[0].values().size();
  const std::size_t dim = mu[0].dim();
  std::vector<double> best(directions, 0.0);
  parallel_chunks(directions, 1, [&](std::size_t k, std::size_t, std::size_t) {
    const auto dir = slice_direction(k, entries, dim, seed);
    auto project = [&](const EmpiricalMeasure& m) {
      std::vector<double> out(m.size());
      for (std::size_t i = 0; i < m.size(); ++i) {
        const auto v = m[i].values();
        out[i] = std::inner_product(v.begin(), v.end(), dir.begin(), 0.0);
      }
      return out;
    };
    best[k] = dbl_1d(project(mu), project(nu));
  });
  return *std::max_element(best.begin(), best.end());
}

EmpiricalMeasure sample_measure(const PathSampler& sampler, std::size_t count,
                                std::uint64_t seed) {
  require(count >= 1, "sample_measure: need at least one sample");
  std::vector<PathVector> atoms(count, PathVector::point({0.0}));
  parallel_chunks(count, 64, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      GaussianStream rng(seed, i);
      atoms[i] = sampler(rng);
    }
  });
  return EmpiricalMeasure(std::move(atoms));
}

double dbl_selfconsistency(const PathSampler& sampler, std::size_t count, std::uint64_t seed,
                           DblMethod method, std::size_t directions) {
  const EmpiricalMeasure a = sample_measure(sampler, count, derive_seed(seed, 1));
  const EmpiricalMeasure b = sample_measure(sampler, count, derive_seed(seed, 2));
  return method == DblMethod::exact ? empirical_dbl(a, b)
                                    : sliced_dbl_lower(a, b, directions, derive_seed(seed, 3));
}

void write_samples_csv(const EmpiricalMeasure& m, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  const std::size_t entries = m[0].values().size();
  for (std::size_t k = 0; k < entries; ++k) out << (k ? "," : "") << 'v' << k;
  out << '\n';
  char buf[32];
  for (const auto& atom : m.atoms()) {
    const auto v = atom.values();
    for (std::size_t k = 0; k < v.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", v[k]);
      out << (k ? "," : "") << buf;
    }
    out << '\n';
  }
}

EmpiricalMeasure read_samples_csv(const std::filesystem::path& file, double horizon,
                                  std::size_t dim) {
  std::ifstream in(file);
  if (!in) throw DomainError("cannot open sample file " + file.string());
  std::vector<PathVector> atoms;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && !line.empty() && (std::isalpha(static_cast<unsigned char>(line[0]))))
      continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw DomainError(file.string() + ":" + std::to_string(line_no) + ": bad value '" +
                          cell + "'");
      }
    }
    require(!values.empty() && values.size() % dim == 0,
            file.string() + ":" + std::to_string(line_no) + ": row length not a multiple of d");
    const std::size_t steps = values.size() / dim - 1;
    atoms.emplace_back(steps == 0 ? 0.0 : horizon, steps, dim, std::move(values));
  }
  return EmpiricalMeasure(std::move(atoms));
}

}  // namespace chaosbound
