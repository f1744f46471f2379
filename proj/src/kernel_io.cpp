#include "chaosbound/kernel_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "chaosbound/errors.hpp"

namespace chaosbound {

using nlohmann::json;

json path_to_json(const PathVector& path) {
  const auto v = path.values();
  return {{"T", path.horizon()}, {"d", path.dim()}, {"values", std::vector<double>(v.begin(), v.end())}};
}

PathVector path_from_json(const json& j) {
  const double horizon = j.at("T").get<double>();
  const auto dim = j.at("d").get<std::size_t>();
  auto values = j.at("values").get<std::vector<double>>();
  require(dim >= 1 && !values.empty() && values.size() % dim == 0,
          "path: value count is not a multiple of d");
  const std::size_t steps = values.size() / dim - 1;
  return PathVector(horizon, steps, dim, std::move(values));
}

json kernel_to_json(const VectorKernel& f) {
  json terms = json::array();
  for (const auto& t : f.terms()) {
    json coeffs = json::array();
    for (const auto& [tuple, value] : t.kernel.ordered_entries()) {
      json row = json::array();
      for (Index i : tuple) row.push_back(i);
      row.push_back(value);
      coeffs.push_back(std::move(row));
    }
    terms.push_back({{"coeffs", std::move(coeffs)}, {"path", path_to_json(t.path)}});
  }
  return {{"order", f.order()}, {"truncation", f.truncation()}, {"terms", std::move(terms)}};
}

ScalarKernel canonical_form(const ScalarKernel& f) {
  if (f.is_symmetric()) return f;
  std::map<std::vector<Index>, std::pair<double, std::size_t>> groups;
  bool symmetric = true;
  for (std::size_t e = 0; e < f.size() && symmetric; ++e) {
    auto t = f.indices(e);
    std::vector<Index> key(t.begin(), t.end());
    std::sort(key.begin(), key.end());
    auto [it, fresh] = groups.emplace(key, std::make_pair(f.value(e), 0));
    symmetric = fresh || it->second.first == f.value(e);
    ++it->second.second;
  }
  for (const auto& [key, g] : groups)
    symmetric = symmetric && static_cast<double>(g.second) == arrangement_count(key);
  if (!symmetric) return f;
  KernelBuilder b(f.order(), f.truncation(), true);
  for (const auto& [key, g] : groups) b.add(key, g.first);
  return b.build();
}

VectorKernel kernel_from_json(const json& j) {
  try {
    const int order = j.at("order").get<int>();
    const auto truncation = j.at("truncation").get<Index>();
    const auto& terms = j.at("terms");
    require(terms.is_array() && !terms.empty(), "kernel: terms must be a nonempty array");
    const PathVector first = path_from_json(terms.front().at("path"));
    VectorKernel f(order, truncation, first);
    std::vector<Index> tuple;
    for (const auto& term : terms) {
      KernelBuilder b(order, truncation, false);
      for (const auto& row : term.at("coeffs")) {
        require(row.is_array() && row.size() == static_cast<std::size_t>(order) + 1,
                "kernel: coefficient rows need order + 1 entries");
        tuple.clear();
        for (int k = 0; k < order; ++k) tuple.push_back(row[static_cast<std::size_t>(k)].get<Index>());
        b.add(tuple, row.back().get<double>());
      }
      f.add_term(canonical_form(b.build()), path_from_json(term.at("path")));
    }
    return f;
  } catch (const json::exception& e) {
    throw DomainError(std::string("kernel JSON: ") + e.what());
  }
}

void write_kernel(const VectorKernel& f, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << kernel_to_json(f).dump(2) << '\n';
}

VectorKernel read_kernel(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DomainError("cannot open kernel file " + file.string());
  try {
    return kernel_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw DomainError(std::string("kernel JSON: ") + e.what());
  }
}

}  // namespace chaosbound
