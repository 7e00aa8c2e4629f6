#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace tlp {

// Invalid model definition: bad parameters, non-monotone grid, failed validation.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed experiment / CLI configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Point budget exhausted before the tail criterion was met. Carries what was
// achieved so callers can report or retry with a larger budget.
class BudgetError : public std::runtime_error {
 public:
  BudgetError(const std::string& msg, std::uint64_t points_used,
              double achieved_rel_tol, double partial_sum)
      : std::runtime_error(msg),
        points_used(points_used),
        achieved_rel_tol(achieved_rel_tol),
        partial_sum(partial_sum) {}

  std::uint64_t points_used;
  double achieved_rel_tol;
  double partial_sum;
};

}  // namespace tlp
