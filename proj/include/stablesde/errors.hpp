#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stablesde {

/// Base of every error thrown by the library. `kind()` is a stable,
/// machine-readable tag used by the CLI error line.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
  /// Process exit status the CLI maps this error to (1 user, 2 numerical).
  virtual int exit_code() const noexcept { return 1; }
};

/// Quadrature or iterative numerics failed to reach tolerance.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double error_estimate)
      : Error(what), error_estimate_(error_estimate) {}
  const char* kind() const noexcept override { return "numerical_failure"; }
  int exit_code() const noexcept override { return 2; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double error_estimate_;
};

/// Rejection sampler exceeded its attempt budget.
class SamplerStall : public Error {
 public:
  SamplerStall(double x, long attempts);
  /// Same, tagged with the chain iteration that stalled.
  SamplerStall(const SamplerStall& inner, std::size_t iteration);
  const char* kind() const noexcept override { return "sampler_stall"; }
  int exit_code() const noexcept override { return 2; }
  double x() const noexcept { return x_; }
  long attempts() const noexcept { return attempts_; }
  /// npos unless raised inside a chain.
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  double x_;
  long attempts_;
  std::size_t iteration_ = std::string::npos;
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  const char* kind() const noexcept override { return "parse_error"; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UndeclaredIdentifier : public Error {
 public:
  UndeclaredIdentifier(const std::string& name, std::size_t offset);
  const char* kind() const noexcept override { return "undeclared_identifier"; }
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

/// Expression evaluation hit a domain violation (division by zero, log of a
/// nonpositive number, ...). `offset` is the source byte offset of the node,
/// or npos for synthesized nodes.
class EvalError : public Error {
 public:
  EvalError(const std::string& what, std::size_t offset);
  const char* kind() const noexcept override { return "eval_error"; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Scale function not positive, or parameter outside its box.
class ModelViolation : public Error {
 public:
  ModelViolation(const std::string& what, std::size_t index);
  const char* kind() const noexcept override { return "model_violation"; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class SimulationFailure : public Error {
 public:
  SimulationFailure(const std::string& what, std::size_t step);
  const char* kind() const noexcept override { return "simulation_failure"; }
  int exit_code() const noexcept override { return 2; }
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class IoError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

}  // namespace stablesde
