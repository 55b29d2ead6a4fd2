#ifndef MEMRC_ERRORS_HPP
#define MEMRC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace memrc {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Integration produced NaN/Inf; usually the step size is too large.
struct NonFiniteStateError : Error {
  using Error::Error;
};

// The scaled quadrature for the closed-form volatile solution left the
// representable range; shorten the horizon or use the integrator.
struct QuadratureUnderflowError : Error {
  using Error::Error;
};

struct LengthMismatchError : Error {
  using Error::Error;
};

struct SymbolOutOfRangeError : Error {
  using Error::Error;
};

// First-order expansion bound alpha < m*sqrt(omega^2+eps^2)/lambda violated.
struct ExpansionDivergesError : Error {
  using Error::Error;
};

// Parameter mapping requested outside its validity region (e.g. m <= lambda).
struct InvalidRegimeError : Error {
  using Error::Error;
};

struct InsufficientPeriodsError : Error {
  using Error::Error;
};

struct GridMismatchError : Error {
  using Error::Error;
};

struct OffsetOutOfRangeError : Error {
  using Error::Error;
};

struct SingularSystemError : Error {
  using Error::Error;
};

struct DegenerateTargetError : Error {
  using Error::Error;
};

struct DimensionMismatchError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

// Configuration problems carry the offending line/key so the CLI can point
// at the exact spot in the file.
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_number(line) {}
  int line_number = 0;
};

struct UnknownKeyError : ConfigError {
  using ConfigError::ConfigError;
};

struct RangeViolationError : ConfigError {
  using ConfigError::ConfigError;
};

}  // namespace memrc

#endif  // MEMRC_ERRORS_HPP
