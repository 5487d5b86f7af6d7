#pragma once

// Reduced metric, gyroscopic coefficients, the one-form Theta and the
// gyroscopic two-form of a Chaplygin system.

#include "chaplygin/system.hpp"

namespace chaplygin {

struct GeometryOptions {
  /// Finite-difference step for brackets; kAutoStep picks the default.
  double fd_step = numkit::kAutoStep;
  /// Normalized Gram determinant below which the frame counts as degenerate.
  double degeneracy_tol = 1e-12;
};

/// K_ij = <<hor_i, hor_j>> at the section point over s.
ReducedMetric reduced_metric(const SystemDefinition& sys, const Vec& s,
                             const GeometryOptions& opts = {});

/// Gyroscopic coefficients at s, solved from the Gram system
///   sum_k C_ij^k <<hor_k, hor_l>> = <<[hor_i, hor_j], hor_l>>.
/// The right-hand side uses the unprojected bracket: the metric-orthogonal
/// projector onto span{hor_l} leaves pairings with hor_l unchanged.
GyroCoefficients gyroscopic_coefficients(const SystemDefinition& sys, const Vec& s,
                                         const GeometryOptions& opts = {});

/// Same computation at an explicit configuration point q over s. Used to
/// check independence of the chosen section.
GyroCoefficients gyroscopic_coefficients_at(const SystemDefinition& sys, const Vec& s,
                                            const ConfigPoint& q,
                                            const GeometryOptions& opts = {});

/// Cross-check route for Euclidean models: builds P = D (D^T M D)^{-1} D^T M
/// explicitly and reads off coefficients from P [hor_i, hor_j] by least squares.
GyroCoefficients gyroscopic_coefficients_projector(const SystemDefinition& sys, const Vec& s,
                                                   const GeometryOptions& opts = {});

/// Theta_i = sum_j C_ji^j.
Vec theta(const GyroCoefficients& C);
Vec theta(const SystemDefinition& sys, const Vec& s, const GeometryOptions& opts = {});

/// (Omega_T)_ij = sum_k C_ij^k p_k.
Mat gyro_two_form(const SystemDefinition& sys, const ReducedState& state,
                  const GeometryOptions& opts = {});

/// Horizontal frame for a Euclidean chart where the shape coordinates are a
/// subset of the ambient ones. constraints(q) is the (n - r) x n matrix whose
/// kernel is the distribution; hor d/ds^i = e_{shape[i]} + w with w in the
/// complementary coordinates, solved from constraints(q) (e + w) = 0.
std::vector<VectorMap> horizontal_frame_from_constraints(
    std::function<Mat(const Vec&)> constraints, std::vector<Index> shape_coordinates,
    Index ambient_dim);

}  // namespace chaplygin
