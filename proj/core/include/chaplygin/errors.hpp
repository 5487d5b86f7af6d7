#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace chaplygin {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonFiniteEvaluation : public Error {
 public:
  NonFiniteEvaluation(const std::string& what, Eigen::Index coordinate)
      : Error(what), coordinate_(coordinate) {}
  /// Perturbed input coordinate that produced the non-finite output (-1: base point).
  Eigen::Index coordinate() const noexcept { return coordinate_; }

 private:
  Eigen::Index coordinate_;
};

class InvalidGroupElement : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, Eigen::Index pivot)
      : Error(what), pivot_(pivot) {}
  Eigen::Index pivot() const noexcept { return pivot_; }

 private:
  Eigen::Index pivot_;
};

class DegenerateFrame : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

/// Raised when a shape point falls outside the chart where the system is defined.
class ChartFloorViolation : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class StepSizeUnderflow : public Error {
 public:
  using Error::Error;
};

class FixedPointDivergence : public Error {
 public:
  using Error::Error;
};

}  // namespace chaplygin
