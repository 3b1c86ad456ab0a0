#pragma once

#include <stdexcept>
#include <string>

namespace kitepilot {

/// A configuration value violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed scenario or log text. line() is 1-based, 0 when not applicable.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Base of the terminal simulation outcomes.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// theta left the domain where 1/sin(theta) and 1/tan(theta) are bounded.
class SingularStateError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Air path speed too low to evaluate the mass term M / v_a.
class DegenerateWindError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Kite elevation fell below the crash threshold.
class CrashError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Regressor carries no information for a least-squares fit.
class DegenerateRegressorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kitepilot
