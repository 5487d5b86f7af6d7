#include "chaplygin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chaplygin {

namespace {

void require_in_domain(const SystemDefinition& sys, const Vec& s) {
  if (s.size() != sys.shape_dim) {
    throw DimensionMismatch(sys.label + ": shape point has length " + std::to_string(s.size()) +
                            ", expected " + std::to_string(sys.shape_dim));
  }
  if (!sys.domain.contains(s)) {
    throw ChartFloorViolation(sys.label + ": shape point outside chart (" +
                              sys.domain.description + ")");
  }
}

ReducedMetric finish_metric(const SystemDefinition& sys, Mat K, double degeneracy_tol) {
  K = 0.5 * (K + K.transpose());
  const Vec d = K.diagonal();
  if ((d.array() <= 0.0).any()) {
    throw DegenerateFrame(sys.label + ": horizontal frame has a vanishing vector");
  }
  const Vec inv_sqrt = d.array().rsqrt();
  const Mat normalized = inv_sqrt.asDiagonal() * K * inv_sqrt.asDiagonal();
  if (!(normalized.determinant() > degeneracy_tol)) {
    throw DegenerateFrame(sys.label + ": horizontal frame is linearly dependent");
  }
  Mat K_inv = numkit::spd_inverse(K);
  return ReducedMetric{std::move(K), std::move(K_inv)};
}

// Frame vectors of a Euclidean model as columns at q.
Mat frame_matrix(const EuclideanModel& m, const Vec& q) {
  Mat F(m.ambient_dim, static_cast<Index>(m.frame.size()));
  for (std::size_t i = 0; i < m.frame.size(); ++i) {
    const Vec v = m.frame[i](q);
    if (v.size() != m.ambient_dim) throw DimensionMismatch("frame vector has wrong length");
    F.col(static_cast<Index>(i)) = v;
  }
  return F;
}

Mat metric_at(const EuclideanModel& m, const Vec& q) {
  Mat M = m.metric(q);
  if (M.rows() != m.ambient_dim || M.cols() != m.ambient_dim) {
    throw DimensionMismatch("metric has wrong size");
  }
  return M;
}

GyroCoefficients euclidean_gyro(const SystemDefinition& sys, const EuclideanModel& m,
                                const Vec& s, const Vec& q, const GeometryOptions& opts) {
  const Index r = sys.shape_dim;
  const Mat F = frame_matrix(m, q);
  const Mat M = metric_at(m, q);
  const ReducedMetric km = finish_metric(sys, F.transpose() * M * F, opts.degeneracy_tol);
  GyroCoefficients C(r, s);
  for (Index i = 0; i < r; ++i) {
    const numkit::EuclideanVectorField Xi{m.frame[static_cast<std::size_t>(i)], m.ambient_dim};
    for (Index j = i + 1; j < r; ++j) {
      const numkit::EuclideanVectorField Xj{m.frame[static_cast<std::size_t>(j)], m.ambient_dim};
      const Vec bracket = numkit::lie_bracket_euclidean(Xi, Xj, q, opts.fd_step);
      const Vec rhs = F.transpose() * (M * bracket);
      C.set_pair(i, j, numkit::spd_solve(km.K, rhs));
    }
  }
  return C;
}

ReducedMetric group_metric(const SystemDefinition& sys, const GroupModel& m, const Mat& g,
                           const GeometryOptions& opts, std::vector<Mat>* frame_out) {
  const Index r = sys.shape_dim;
  std::vector<Mat> X;
  X.reserve(static_cast<std::size_t>(r));
  for (const auto& f : m.frame) X.push_back(f(g));
  Mat K(r, r);
  for (Index k = 0; k < r; ++k) {
    const Mat IXk = m.inertia(X[static_cast<std::size_t>(k)]);
    for (Index l = 0; l < r; ++l) {
      K(k, l) = numkit::killing_pairing(IXk, X[static_cast<std::size_t>(l)]);
    }
  }
  if (frame_out) *frame_out = std::move(X);
  return finish_metric(sys, K, opts.degeneracy_tol);
}

GyroCoefficients group_gyro(const SystemDefinition& sys, const GroupModel& m, const Vec& s,
                            const Mat& g, const GeometryOptions& opts) {
  numkit::require_rotation(g);
  const Index r = sys.shape_dim;
  std::vector<Mat> X;
  const ReducedMetric km = group_metric(sys, m, g, opts, &X);
  GyroCoefficients C(r, s);
  for (Index i = 0; i < r; ++i) {
    const numkit::LeftTrivializedField Xi{m.frame[static_cast<std::size_t>(i)], m.n};
    for (Index j = i + 1; j < r; ++j) {
      const numkit::LeftTrivializedField Xj{m.frame[static_cast<std::size_t>(j)], m.n};
      const Mat bracket = numkit::lie_bracket_left_trivialized(Xi, Xj, g, opts.fd_step);
      const Mat Ib = m.inertia(bracket);
      Vec rhs(r);
      for (Index l = 0; l < r; ++l) rhs(l) = numkit::killing_pairing(Ib, X[static_cast<std::size_t>(l)]);
      C.set_pair(i, j, numkit::spd_solve(km.K, rhs));
    }
  }
  return C;
}

}  // namespace

ReducedMetric reduced_metric(const SystemDefinition& sys, const Vec& s,
                             const GeometryOptions& opts) {
  require_in_domain(sys, s);
  return std::visit(
      [&](const auto& m) -> ReducedMetric {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EuclideanModel>) {
          const Vec q = m.section(s);
          const Mat F = frame_matrix(m, q);
          return finish_metric(sys, F.transpose() * metric_at(m, q) * F, opts.degeneracy_tol);
        } else if constexpr (std::is_same_v<T, GroupModel>) {
          return group_metric(sys, m, m.section(s), opts, nullptr);
        } else {
          return finish_metric(sys, m.metric(s), opts.degeneracy_tol);
        }
      },
      sys.model);
}

GyroCoefficients gyroscopic_coefficients(const SystemDefinition& sys, const Vec& s,
                                         const GeometryOptions& opts) {
  require_in_domain(sys, s);
  return std::visit(
      [&](const auto& m) -> GyroCoefficients {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, EuclideanModel>) {
          return euclidean_gyro(sys, m, s, m.section(s), opts);
        } else if constexpr (std::is_same_v<T, GroupModel>) {
          return group_gyro(sys, m, s, m.section(s), opts);
        } else {
          GyroCoefficients C = m.gyro(s);
          if (C.r() != sys.shape_dim) throw DimensionMismatch("closed-form gyro has wrong size");
          return C;
        }
      },
      sys.model);
}

GyroCoefficients gyroscopic_coefficients_at(const SystemDefinition& sys, const Vec& s,
                                            const ConfigPoint& q, const GeometryOptions& opts) {
  require_in_domain(sys, s);
  if (const auto* em = std::get_if<EuclideanModel>(&sys.model)) {
    const auto* qv = std::get_if<Vec>(&q);
    if (!qv) throw DimensionMismatch("Euclidean model needs a coordinate vector");
    return euclidean_gyro(sys, *em, s, *qv, opts);
  }
  if (const auto* gm = std::get_if<GroupModel>(&sys.model)) {
    const auto* g = std::get_if<Mat>(&q);
    if (!g) throw DimensionMismatch("group model needs a group element");
    return group_gyro(sys, *gm, s, *g, opts);
  }
  throw InvalidParams(sys.label + ": closed-form model has no configuration space");
}

GyroCoefficients gyroscopic_coefficients_projector(const SystemDefinition& sys, const Vec& s,
                                                   const GeometryOptions& opts) {
  require_in_domain(sys, s);
  const auto* m = std::get_if<EuclideanModel>(&sys.model);
  if (!m) throw InvalidParams(sys.label + ": projector route needs a Euclidean model");
  const Index r = sys.shape_dim;
  const Vec q = m->section(s);
  const Mat D = frame_matrix(*m, q);
  const Mat M = metric_at(*m, q);
  const Mat P = D * (D.transpose() * M * D).inverse() * D.transpose() * M;
  GyroCoefficients C(r, s);
  for (Index i = 0; i < r; ++i) {
    const numkit::EuclideanVectorField Xi{m->frame[static_cast<std::size_t>(i)], m->ambient_dim};
    for (Index j = i + 1; j < r; ++j) {
      const numkit::EuclideanVectorField Xj{m->frame[static_cast<std::size_t>(j)], m->ambient_dim};
      const Vec projected = P * numkit::lie_bracket_euclidean(Xi, Xj, q, opts.fd_step);
      C.set_pair(i, j, D.colPivHouseholderQr().solve(projected));
    }
  }
  return C;
}

Vec theta(const GyroCoefficients& C) {
  const Index r = C.r();
  Vec th = Vec::Zero(r);
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) th(i) += C(j, i, j);
  }
  return th;
}

Vec theta(const SystemDefinition& sys, const Vec& s, const GeometryOptions& opts) {
  return theta(gyroscopic_coefficients(sys, s, opts));
}

Mat gyro_two_form(const SystemDefinition& sys, const ReducedState& state,
                  const GeometryOptions& opts) {
  if (state.p.size() != sys.shape_dim) throw DimensionMismatch("momentum has wrong length");
  return gyroscopic_coefficients(sys, state.s, opts).contract(state.p);
}

std::vector<VectorMap> horizontal_frame_from_constraints(
    std::function<Mat(const Vec&)> constraints, std::vector<Index> shape_coordinates,
    Index ambient_dim) {
  std::vector<Index> fiber;
  for (Index a = 0; a < ambient_dim; ++a) {
    if (std::find(shape_coordinates.begin(), shape_coordinates.end(), a) ==
        shape_coordinates.end()) {
      fiber.push_back(a);
    }
  }
  if (fiber.size() + shape_coordinates.size() != static_cast<std::size_t>(ambient_dim)) {
    throw InvalidParams("horizontal_frame_from_constraints: bad shape coordinate list");
  }
  std::vector<VectorMap> frame;
  for (std::size_t i = 0; i < shape_coordinates.size(); ++i) {
    frame.push_back([constraints, shape_coordinates, fiber, ambient_dim, i](const Vec& q) {
      const Mat A = constraints(q);
      const Index nf = static_cast<Index>(fiber.size());
      if (A.rows() != nf || A.cols() != ambient_dim) {
        throw DimensionMismatch("constraint matrix must be (n - r) x n");
      }
      Mat Af(nf, nf);
      for (Index c = 0; c < nf; ++c) Af.col(c) = A.col(fiber[static_cast<std::size_t>(c)]);
      const Vec rhs = -A.col(shape_coordinates[i]);
      Eigen::FullPivLU<Mat> lu(Af);
      if (!lu.isInvertible()) {
        throw DegenerateFrame("constraints do not determine the fiber velocities");
      }
      const Vec w = lu.solve(rhs);
      Vec v = Vec::Zero(ambient_dim);
      v(shape_coordinates[i]) = 1.0;
      for (Index c = 0; c < nf; ++c) v(fiber[static_cast<std::size_t>(c)]) = w(c);
      return v;
    });
  }
  return frame;
}

}  // namespace chaplygin
