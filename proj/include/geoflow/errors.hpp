#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace geoflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "error"; }
};

class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain_error"; }
};

/// A degree-shifting operator would write outside [-N_theta, N_theta].
class BandOverflow : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "band_overflow"; }
};

class PreconditionError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "precondition_error"; }
};

class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config_error"; }
};

class SolverError : public Error {
 public:
  SolverError(const std::string& what, std::vector<double> history)
      : Error(what), residual_history(std::move(history)) {}
  const char* kind() const noexcept override { return "solver_error"; }
  std::vector<double> residual_history;
};

class NontrappingViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "nontrapping_violation"; }
};

}  // namespace geoflow
