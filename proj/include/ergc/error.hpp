#pragma once

#include <stdexcept>
#include <string>

namespace ergc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A negative Sobolev power or Biot–Savart inversion was requested on a field
/// whose k = 0 coefficient is not zero.
class MeanZeroViolation : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// A control does not lie in the span of the forced directions.
class RangeViolation : public Error {
 public:
  RangeViolation(const std::string& what, double relative_residual)
      : Error(what), relative_residual_(relative_residual) {}
  double relative_residual() const noexcept { return relative_residual_; }

 private:
  double relative_residual_;
};

/// A trajectory produced a non-finite coefficient.
class DivergedTrajectory : public Error {
 public:
  DivergedTrajectory(const std::string& what, double last_finite_time)
      : Error(what), last_finite_time_(last_finite_time) {}
  double last_finite_time() const noexcept { return last_finite_time_; }

 private:
  double last_finite_time_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration problem; `key_path()` names the offending dotted key.
class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& message)
      : Error(key_path.empty() ? message : key_path + ": " + message),
        key_path_(std::move(key_path)) {}
  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

class InsufficientDuration : public Error {
 public:
  using Error::Error;
};

}  // namespace ergc
