#include "chaplygin/system.hpp"

#include <cmath>
#include <limits>

namespace chaplygin {

GyroCoefficients::GyroCoefficients(Index r, Vec base)
    : r_(r), base_(std::move(base)), c_(static_cast<std::size_t>(r * r * r), 0.0) {
  if (r < 1) throw InvalidParams("GyroCoefficients: r must be positive");
}

void GyroCoefficients::set_pair(Index i, Index j, const Vec& column) {
  if (i == j) throw InvalidParams("GyroCoefficients::set_pair: i == j");
  if (column.size() != r_) throw DimensionMismatch("GyroCoefficients::set_pair: column size");
  for (Index k = 0; k < r_; ++k) {
    c_[static_cast<std::size_t>((i * r_ + j) * r_ + k)] = column(k);
    c_[static_cast<std::size_t>((j * r_ + i) * r_ + k)] = -column(k);
  }
}

Mat GyroCoefficients::contract(const Vec& p) const {
  if (p.size() != r_) throw DimensionMismatch("GyroCoefficients::contract: momentum size");
  Mat out = Mat::Zero(r_, r_);
  for (Index i = 0; i < r_; ++i) {
    for (Index j = 0; j < r_; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < r_; ++k) acc += (*this)(i, j, k) * p(k);
      out(i, j) = acc;
    }
  }
  return out;
}

double GyroCoefficients::max_abs() const {
  double m = 0.0;
  for (double v : c_) m = std::max(m, std::abs(v));
  return m;
}

Vec ReducedState::packed() const {
  Vec z(s.size() + p.size());
  z << s, p;
  return z;
}

ReducedState ReducedState::unpack(const Vec& z) {
  if (z.size() % 2 != 0) throw DimensionMismatch("ReducedState::unpack: odd length");
  const Index r = z.size() / 2;
  return ReducedState{z.head(r), z.tail(r)};
}

bool ShapeDomain::contains(const Vec& s) const {
  if (!s.allFinite()) return false;
  if (lower.size() == s.size() && (s.array() < lower.array()).any()) return false;
  if (upper.size() == s.size() && (s.array() > upper.array()).any()) return false;
  return predicate ? predicate(s) : true;
}

ShapeDomain ShapeDomain::unbounded(Index r) {
  const double inf = std::numeric_limits<double>::infinity();
  return ShapeDomain{Vec::Constant(r, -inf), Vec::Constant(r, inf), {}, "R^" + std::to_string(r)};
}

void SystemDefinition::validate() const {
  if (shape_dim < 2) throw InvalidParams(label + ": shape dimension must be at least 2");
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EuclideanModel>) {
          if (static_cast<Index>(m.frame.size()) != shape_dim) {
            throw InvalidParams(label + ": frame size differs from shape dimension");
          }
          if (!m.metric || !m.section) throw InvalidParams(label + ": missing metric or section");
          if (m.ambient_dim < shape_dim) throw InvalidParams(label + ": ambient dimension < r");
        } else if constexpr (std::is_same_v<T, GroupModel>) {
          if (static_cast<Index>(m.frame.size()) != shape_dim) {
            throw InvalidParams(label + ": frame size differs from shape dimension");
          }
          if (!m.inertia || !m.section) throw InvalidParams(label + ": missing inertia or section");
        } else {
          if (!m.metric || !m.gyro) throw InvalidParams(label + ": missing closed forms");
        }
      },
      model);
}

}  // namespace chaplygin
