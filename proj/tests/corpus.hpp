#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "chaosbound/flatmetric.hpp"

struct TransportInstance {
  std::string name;
  chaosbound::EmpiricalMeasure mu;
  chaosbound::EmpiricalMeasure nu;
};

inline std::vector<TransportInstance> load_flat_corpus() {
  const std::string file = std::string(CHAOSBOUND_TEST_DATA) + "/flat_corpus.json";
  std::ifstream in(file);
  if (!in) throw std::runtime_error("missing corpus " + file);
  const auto doc = nlohmann::json::parse(in);
  std::vector<TransportInstance> out;
  for (const auto& inst : doc.at("instances")) {
    const double horizon = inst.at("T");
    const std::size_t steps = inst.at("steps");
    auto measure = [&](const nlohmann::json& atoms) {
      std::vector<chaosbound::PathVector> paths;
      for (const auto& a : atoms)
        paths.emplace_back(horizon, steps, 1, a.get<std::vector<double>>());
      return chaosbound::EmpiricalMeasure(std::move(paths));
    };
    out.push_back({inst.at("name"), measure(inst.at("mu")), measure(inst.at("nu"))});
  }
  return out;
}
