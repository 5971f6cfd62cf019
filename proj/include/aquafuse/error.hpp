#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aquafuse {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: bad kernel size, out-of-range value, too-small image.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Buffers that must share an extent do not.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an estimator is violated by its input.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Nonlinear least-squares fit produced a non-finite cost. Carries the last
/// iterate whose cost was finite.
class FitError : public Error {
 public:
  FitError(const std::string& what, std::vector<double> last_finite)
      : Error(what), last_finite_(std::move(last_finite)) {}

  const std::vector<double>& last_finite_iterate() const { return last_finite_; }

 private:
  std::vector<double> last_finite_;
};

/// Non-fatal diagnostics collected while estimating. Fallback paths append
/// here instead of failing.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->push_back(std::move(message));
}

}  // namespace aquafuse
