#pragma once

#include <stdexcept>
#include <string>

namespace nle {

// Input outside an operation's mathematical domain (y = 0, sigma outside (0,2), ...).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Combination the library does not define (drift vector at sigma = 1, lambda <= 0).
struct UnsupportedError : std::logic_error {
  using std::logic_error::logic_error;
};

struct SizeMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Work estimate exceeds a hard budget (expected jump count, brute-force grid size).
struct BudgetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A quadrature or projection could not reach its tolerance.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved_bound() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace nle
