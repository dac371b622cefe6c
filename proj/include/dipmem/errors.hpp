#pragma once

#include <stdexcept>
#include <string>

namespace dipmem {

enum class ErrorKind {
  parameter,
  singular_transform,
  stability,
  convergence,
  resolution,
  unsupported_case,
  config,
  io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

struct ParameterError : Error {
  explicit ParameterError(const std::string& m) : Error(ErrorKind::parameter, m) {}
};

/// Raised when dividing by a coupling that vanishes where the field does not.
struct SingularTransformError : Error {
  SingularTransformError(const std::string& m, double time)
      : Error(ErrorKind::singular_transform, m), time(time) {}
  double time;
};

struct StabilityError : Error {
  explicit StabilityError(const std::string& m) : Error(ErrorKind::stability, m) {}
};

struct ConvergenceError : Error {
  ConvergenceError(const std::string& m, double residual)
      : Error(ErrorKind::convergence, m), residual(residual) {}
  double residual;
};

struct ResolutionError : Error {
  explicit ResolutionError(const std::string& m) : Error(ErrorKind::resolution, m) {}
};

struct UnsupportedCaseError : Error {
  explicit UnsupportedCaseError(const std::string& m) : Error(ErrorKind::unsupported_case, m) {}
};

/// Config problems carry the JSON path of the offending field and, for
/// syntax errors, the 1-based line.
struct ConfigError : Error {
  ConfigError(const std::string& m, std::string field, int line = 0)
      : Error(ErrorKind::config, m), field(std::move(field)), line(line) {}
  std::string field;
  int line;
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(ErrorKind::io, m) {}
};

}  // namespace dipmem
