#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hnncert {

// Malformed or out-of-range input (bad letters, rank mismatch, parse errors).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called outside its domain (e.g. a non-immersion passed to
// a fiber product).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Iterative numerics gave up; carries the last iterate for diagnostics.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(std::string const& what, std::vector<double> last)
      : std::runtime_error(what), last_iterate(std::move(last)) {}
  std::vector<double> last_iterate;
};

// A constructive step failed (e.g. no preimage for an annulus ring).
class ConstructionError : public std::runtime_error {
 public:
  ConstructionError(std::string const& what, int failing_power)
      : std::runtime_error(what), power(failing_power) {}
  int power;
};

// A construction would exceed its size budget.
class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hnncert
