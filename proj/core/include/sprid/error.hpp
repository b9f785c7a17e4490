#pragma once

#include <stdexcept>
#include <string>

namespace sprid {

/// Process exit codes used by the command-line tool; every library error maps
/// onto one of them.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kParse = 3,
  kInfeasible = 4,
  kNumerical = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// Invalid parameters, dimension mismatches, bad configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ExitCode::kConfig, what) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ExitCode::kParse, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ExitCode::kNumerical, what) {}
};

/// Raised when a transfer function is evaluated on (or numerically at) one of its poles.
class EvaluationError : public NumericalError {
 public:
  EvaluationError(const std::string& what, double omega) : NumericalError(what), omega_(omega) {}
  double omega() const noexcept { return omega_; }

 private:
  double omega_;
};

}  // namespace sprid
