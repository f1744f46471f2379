#pragma once

#include <stdexcept>
#include <string>

namespace chaosbound {

// Violated precondition: bad parameter, mismatched grids or truncations.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical solver failed to converge or lost optimality.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace chaosbound
