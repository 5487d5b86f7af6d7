#pragma once

// Invariant-measure and Hamiltonisation diagnostics: exactness of Theta,
// phi-simplicity detection with phi reconstruction, Liouville audits and
// conformal-closedness residuals.

#include <cstdint>
#include <optional>
#include <vector>

#include "chaplygin/dynamics.hpp"

namespace chaplygin {

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  Index points = 0;

  double spacing() const { return (hi - lo) / static_cast<double>(points - 1); }
  double value(Index k) const { return lo + static_cast<double>(k) * spacing(); }
};

/// Rectangular tensor grid over the chart; flat indices run with the last
/// axis fastest.
struct SampleGrid {
  std::vector<GridAxis> axes;

  Index dim() const { return static_cast<Index>(axes.size()); }
  Index size() const;
  std::vector<Index> multi_index(Index flat) const;
  Index flat_index(const std::vector<Index>& m) const;
  Vec point(const std::vector<Index>& m) const;
  Vec point(Index flat) const { return point(multi_index(flat)); }

  /// Same box [lo, hi] with `points` samples on each of r axes.
  static SampleGrid uniform(Index r, double lo, double hi, Index points);
  /// Throws InvalidParams unless every axis has >= 3 points and lo < hi.
  void validate() const;
};

struct DiagnosticsOptions {
  /// Verdict tolerance for curl, loop, pattern and consistency residuals.
  double tol = 1e-5;
  /// Step for differentiating quantities that are themselves finite
  /// differences (curl, divergence); kAutoStep selects eps^(1/4) scaling.
  double curl_step = numkit::kAutoStep;
  /// Worker threads for grid sweeps (0 = all cores).
  unsigned threads = 0;
  DynamicsOptions dynamics;
};

struct ExactnessReport {
  bool is_exact = false;
  double curl_residual_max = 0.0;
  /// One entry per grid plaquette: the loop integral divided by its area,
  /// so it compares against the same tolerance as the curl.
  std::vector<double> loop_residuals;
  double loop_residual_max = 0.0;
  /// Potential on the grid (flat order), pinned to 0 at the grid origin.
  std::optional<std::vector<double>> sigma_samples;
};

/// Exactness test for a covector field on the grid: FD curl at every node
/// plus plaquette loop integrals. The potential is integrated along
/// axis-ordered paths with 8-point Gauss-Legendre on each grid edge.
ExactnessReport check_exactness(const VectorMap& covector, const SampleGrid& grid,
                                const DiagnosticsOptions& opts = {});

ExactnessReport check_exactness_theta(const SystemDefinition& sys, const SampleGrid& grid,
                                      const DiagnosticsOptions& opts = {});

/// Pointwise gradient estimate of phi read off the gyroscopic coefficients.
struct PhiGradientEstimate {
  /// d_i phi ~ mean over j != i of -C_ij^j.
  Vec gradient;
  /// max over i of the spread (max - min) of the estimates across j.
  double consistency_residual = 0.0;
  /// max |C_ij^k| over k not in {i, j}; 0 when r = 2.
  double pattern_residual = 0.0;
};

PhiGradientEstimate phi_gradient_estimate(const GyroCoefficients& C);
PhiGradientEstimate phi_gradient_estimate(const SystemDefinition& sys, const Vec& s,
                                          const DiagnosticsOptions& opts = {});

struct PhiSimpleReport {
  bool is_phi_simple = false;
  /// Gradient estimates per grid node (flat order).
  std::vector<Vec> grad_phi_samples;
  /// Reconstructed phi pinned to 0 at the grid origin; present when the
  /// gradient field passes the exactness test.
  std::optional<std::vector<double>> phi_samples;
  double pattern_residual_max = 0.0;
  double consistency_residual_max = 0.0;
  /// For r = 2 there are no entries C_ij^k with k outside {i, j}.
  bool pattern_test_vacuous = false;
  ExactnessReport gradient_exactness;
};

PhiSimpleReport detect_phi_simple(const SystemDefinition& sys, const SampleGrid& grid,
                                  const DiagnosticsOptions& opts = {});

/// phi from the gyroscopic coefficients alone: a composite Gauss-Legendre
/// line integral of the gradient estimate along the segment from `base` to s.
/// The gradient of the returned function is the pointwise estimate itself.
PhiFunction reconstructed_phi(const SystemDefinition& sys, const Vec& base,
                              const DiagnosticsOptions& opts = {});

struct LiouvilleTerms {
  /// Divergence of the reduced field for the Liouville volume.
  double divergence = 0.0;
  /// (Theta^#)^l = sum_ij K^ij Theta_i p_j.
  double theta_lift = 0.0;
  double residual() const { return divergence + theta_lift; }
};

LiouvilleTerms liouville_terms(const SystemDefinition& sys, const ReducedState& state,
                               double h = numkit::kAutoStep, const DynamicsOptions& opts = {});

/// div X + (Theta^#)^l; vanishes for every Chaplygin system.
double liouville_residual(const SystemDefinition& sys, const ReducedState& state,
                          double h = numkit::kAutoStep, const DynamicsOptions& opts = {});

using PhaseScalar = std::function<double(const ReducedState&)>;

/// X[sigma_bar] - (Theta^#)^l: zero where e^{sigma_bar} times the Liouville
/// volume is preserved.
double measure_audit(const SystemDefinition& sys, const ReducedState& state,
                     const PhaseScalar& sigma_bar, double h = numkit::kAutoStep,
                     const DynamicsOptions& opts = {});

/// R_ij = sum_k C_ij^k p_k - (p_i d_j phi - p_j d_i phi).
Mat conformal_closedness_residual(const SystemDefinition& sys, const PhiFunction& phi,
                                  const ReducedState& state,
                                  const DynamicsOptions& opts = {});

/// Per-sample channel int_0^t div X dt + sigma(s(t)) - sigma(s(0)): the log
/// of the Jacobian determinant of the flow (Liouville's formula) corrected by
/// the density e^sigma. Stays near zero iff e^sigma times the Liouville
/// volume is preserved along the trajectory.
std::vector<double> trajectory_measure_drift(const SystemDefinition& sys, const Trajectory& traj,
                                             const ScalarMap& sigma,
                                             const DiagnosticsOptions& opts = {});

struct ResidualStats {
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double rms = 0.0;
  std::size_t count = 0;
};

ResidualStats residual_stats(const std::vector<double>& values);

/// Random states with s uniform in the grid box and p uniform in
/// [-p_scale, p_scale]^r; deterministic for a given seed.
std::vector<ReducedState> sample_states(const SampleGrid& box, std::size_t count,
                                        std::uint64_t seed, double p_scale = 1.0);

struct DiagnosticsReport {
  ExactnessReport theta;
  PhiSimpleReport phi;
  ResidualStats liouville;
  /// max |R_ij| over the sampled states with the reconstructed phi.
  double conformal_residual_max = 0.0;
};

/// Full diagnostic sweep: Theta exactness, phi-simplicity and, at `states`,
/// Liouville and conformal-closedness residuals.
DiagnosticsReport diagnose(const SystemDefinition& sys, const SampleGrid& grid,
                           const std::vector<ReducedState>& states,
                           const DiagnosticsOptions& opts = {});

}  // namespace chaplygin
