#pragma once

#include <stdexcept>
#include <string>

namespace serrin {

/// Bad input: invalid specs, configs, preconditions. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure: CG breakdown, mesh quality. Maps to CLI exit code 3.
class SolverError : public std::runtime_error {
public:
  explicit SolverError(const std::string &what, double residual = 0.0)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class MeshQualityError : public SolverError {
public:
  using SolverError::SolverError;
};

} // namespace serrin
