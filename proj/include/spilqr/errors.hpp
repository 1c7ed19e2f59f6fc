#pragma once

#include <stdexcept>
#include <string>

namespace spilqr {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Incompatible or non-square matrix shapes.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A value violates its domain contract (non-PSD cost matrix, negative
/// weight, malformed group index, empty sample list, bad config entry).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(what) {}
};

/// An operation that requires a stable matrix (spectral radius < 1) was
/// handed an unstable one.
class InstabilityError : public Error {
 public:
  explicit InstabilityError(const std::string& what) : Error(what) {}
};

/// An iterative kernel failed to reach its tolerance.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

/// Riccati recursion hit its iteration cap without converging.
class NonStabilizableError : public NumericalError {
 public:
  explicit NonStabilizableError(const std::string& what) : NumericalError(what) {}
};

/// Requested variant is outside the operation's supported set.
class UnsupportedError : public Error {
 public:
  explicit UnsupportedError(const std::string& what) : Error(what) {}
};

}  // namespace spilqr
