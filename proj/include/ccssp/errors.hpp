#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ccssp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad files, bad configuration, or a policy that does not fit its model.
class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigInvalid : public InputError {
 public:
  using InputError::InputError;
};

class PolicyModelMismatch : public InputError {
 public:
  using InputError::InputError;
};

class GridExplosion : public InputError {
 public:
  using InputError::InputError;
};

class NotMinprob : public InputError {
 public:
  using InputError::InputError;
};

// Solver-side failures.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SolveFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MaxItersExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BracketFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class MonotonicityViolation : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoStayAction : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Total-cost evaluation hit a recurrent class with positive cost.
class Divergent : public NumericalError {
 public:
  Divergent(const std::string& what, std::vector<int> states)
      : NumericalError(what), states_(std::move(states)) {}
  const std::vector<int>& states() const noexcept { return states_; }

 private:
  std::vector<int> states_;
};

/// No policy meets the failure budget. Carries the smallest achievable
/// discounted failure measure so callers can report it.
class Infeasible : public Error {
 public:
  Infeasible(const std::string& what, double min_failure_measure)
      : Error(what), min_failure_measure_(min_failure_measure) {}
  double min_failure_measure() const noexcept { return min_failure_measure_; }

 private:
  double min_failure_measure_;
};

class NoSuccessPath : public Infeasible {
 public:
  explicit NoSuccessPath(const std::string& what) : Infeasible(what, 1.0) {}
};

}  // namespace ccssp
