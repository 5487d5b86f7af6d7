#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "chaplygin/numkit.hpp"

namespace chaplygin {

/// r x r x r array C(i, j, k) of gyroscopic coefficients at a shape point.
/// Antisymmetry in (i, j) holds exactly: only set_pair writes entries and it
/// writes both orderings.
class GyroCoefficients {
 public:
  GyroCoefficients(Index r, Vec base);

  Index r() const noexcept { return r_; }
  const Vec& base() const noexcept { return base_; }

  double operator()(Index i, Index j, Index k) const {
    return c_[static_cast<std::size_t>((i * r_ + j) * r_ + k)];
  }

  /// C(i, j, .) = column, C(j, i, .) = -column. Requires i != j.
  void set_pair(Index i, Index j, const Vec& column);

  /// Matrix with entries sum_k C(i, j, k) p_k.
  Mat contract(const Vec& p) const;

  double max_abs() const;

 private:
  Index r_;
  Vec base_;
  std::vector<double> c_;
};

struct ReducedMetric {
  Mat K;
  Mat K_inv;
};

/// Point (s, p) of T*S in bundle coordinates.
struct ReducedState {
  Vec s;
  Vec p;

  Index dim() const noexcept { return s.size(); }
  Vec packed() const;
  static ReducedState unpack(const Vec& z);
};

/// Q is an open set of R^n; horizontal lifts are plain vector fields.
struct EuclideanModel {
  Index ambient_dim = 0;
  /// frame[i](q) = hor d/ds^i at q.
  std::vector<VectorMap> frame;
  /// Kinetic-energy metric as an n x n SPD matrix field.
  std::function<Mat(const Vec&)> metric;
  /// Shape point -> configuration point over it.
  VectorMap section;
};

/// Q = SO(n) with left-trivialized horizontal lifts and a left-invariant
/// kinetic metric (inertia(xi), eta)_k.
struct GroupModel {
  Index n = 0;
  std::vector<std::function<Mat(const Mat&)>> frame;
  std::function<Mat(const Mat&)> inertia;
  std::function<Mat(const Vec&)> section;
};

/// Reduced metric and gyroscopic coefficients given directly as functions of
/// the shape point.
struct ClosedFormModel {
  std::function<Mat(const Vec&)> metric;
  std::function<GyroCoefficients(const Vec&)> gyro;
};

using ConfigModel = std::variant<EuclideanModel, GroupModel, ClosedFormModel>;

/// Shape-space chart: a coordinate box plus an optional extra predicate.
struct ShapeDomain {
  Vec lower;
  Vec upper;
  std::function<bool(const Vec&)> predicate;
  std::string description;

  bool contains(const Vec& s) const;
  static ShapeDomain unbounded(Index r);
};

struct SystemDefinition {
  std::string label;
  Index shape_dim = 0;
  ConfigModel model;
  /// Reduced potential on the shape space; empty means zero.
  ScalarMap potential;
  ShapeDomain domain;
  /// Closed-form phi for systems known to be phi-simple.
  std::optional<ScalarMap> known_phi;

  double potential_at(const Vec& s) const { return potential ? potential(s) : 0.0; }

  /// Checks structural consistency (r >= 2, frame sizes, callables present).
  void validate() const;
};

/// Configuration point: ambient coordinates or a group element.
using ConfigPoint = std::variant<Vec, Mat>;

}  // namespace chaplygin
