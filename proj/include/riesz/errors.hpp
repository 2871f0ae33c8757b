#pragma once

#include <stdexcept>
#include <string>

namespace riesz {

/// Evaluation point outside (or within 1e-12 of the edge of) an axis domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Family parameter outside its basic admissible range (e.g. alpha <= -1).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad scalar argument: n = 0, p <= 1, t < 0, mismatched grids.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Quadrature resolution too low for exact analysis at the requested degree.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Negative power of L applied to a function with a surviving zero mode.
class SingularError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Point too close to the set where the Bellman function is not C^2.
class SingularRegionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double previous, double last)
      : std::runtime_error(what), previous_(previous), last_(last) {}
  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace riesz
