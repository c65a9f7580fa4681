#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qnlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Division by exact zero, square root of a negative number.
class ArithmeticError : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration: bad spectrum spec, scalar mode, strategy config.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// A subspace basis rule that yields no usable columns.
class InvalidRule : public InvalidSpec {
 public:
  using InvalidSpec::InvalidSpec;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Inputs that violate a documented precondition of a pure function.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A matrix expected to be symmetric positive definite is not, or a search
/// direction has nonpositive curvature.
class NotSpd : public Error {
 public:
  using Error::Error;
};

/// A recorded history cannot feed an update formula (zero denominators).
class DegenerateHistory : public Error {
 public:
  using Error::Error;
};

/// The direction strategy cannot produce a direction at this iteration.
class Breakdown : public Error {
 public:
  using Error::Error;
};

/// Pivot of a dense symmetric factorization fell below the relative threshold.
class SingularSystem : public Breakdown {
 public:
  SingularSystem(const std::string& what, double relative_pivot, std::size_t index)
      : Breakdown(what), relative_pivot_(relative_pivot), index_(index) {}

  double relative_pivot() const noexcept { return relative_pivot_; }
  std::size_t index() const noexcept { return index_; }

 private:
  double relative_pivot_;
  std::size_t index_;
};

}  // namespace qnlab
