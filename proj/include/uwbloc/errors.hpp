#ifndef UWBLOC_ERRORS_HPP_
#define UWBLOC_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace uwbloc {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Measurement geometry too close to an anchor to linearize (r below guard).
class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

/// A filter state or covariance entry became NaN/Inf.
class NonFiniteState : public Error {
 public:
  using Error::Error;
};

/// A timestamp moved backwards where monotonic time is required.
class NonMonotonicTime : public Error {
 public:
  using Error::Error;
};

/// Malformed record in a log file; carries the 1-based line number.
class SchemaError : public Error {
 public:
  SchemaError(const std::string& msg, long line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Input stream lacks a record type a consumer requires.
class InsufficientInput : public Error {
 public:
  using Error::Error;
};

/// Not enough motion on the requested axis to estimate a lag.
class InsufficientExcitation : public Error {
 public:
  using Error::Error;
};

/// Trajectory parameters violate the velocity/acceleration envelope.
class EnvelopeViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration, flag, or anchors file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Inputs to an evaluation were produced from different runs.
class ProvenanceMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace uwbloc

#endif  // UWBLOC_ERRORS_HPP_
