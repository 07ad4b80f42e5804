#pragma once

#include <stdexcept>
#include <string>

namespace delaychain {

/// Invalid user input or configuration. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A kernel convolution (or chain initialization) would truncate more
/// tail mass than the history coverage allows.
class CoverageError : public std::runtime_error {
public:
  CoverageError(double truncated_mass, double coverage)
      : std::runtime_error("history coverage " + std::to_string(coverage) +
                           " truncates kernel mass " +
                           std::to_string(truncated_mass)),
        truncated_mass_(truncated_mass),
        coverage_(coverage) {}

  double truncated_mass() const noexcept { return truncated_mass_; }
  double coverage() const noexcept { return coverage_; }

private:
  double truncated_mass_;
  double coverage_;
};

/// Non-finite state encountered during integration. CLI exit code 3.
class DivergenceError : public std::runtime_error {
public:
  explicit DivergenceError(double t)
      : std::runtime_error("non-finite state at t = " + std::to_string(t)),
        time_(t) {}

  double time() const noexcept { return time_; }

private:
  double time_;
};

/// A requested diagnostic could not be computed. CLI exit code 4.
class DiagnosticError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The characteristic equation has no Hopf crossing for these inputs.
class NoHopfError : public DiagnosticError {
public:
  using DiagnosticError::DiagnosticError;
};

/// Bisection bracket endpoints show the same diagnostic.
class BracketError : public DiagnosticError {
public:
  using DiagnosticError::DiagnosticError;
};

/// Too few events (maxima, samples) to form a verdict.
class InsufficientDataError : public DiagnosticError {
public:
  using DiagnosticError::DiagnosticError;
};

}  // namespace delaychain
