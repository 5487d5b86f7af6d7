#pragma once

// Reduced Hamiltonian, the almost-Hamiltonian vector field on T*S, direct
// integration and Chaplygin Hamiltonisation.

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chaplygin/geometry.hpp"

namespace chaplygin {

struct DynamicsOptions {
  GeometryOptions geometry;
  /// Step for dH/ds by central differences on H with p frozen.
  double fd_step = numkit::kAutoStep;
};

/// H = 1/2 p^T K^{-1} p + U(s).
double hamiltonian(const SystemDefinition& sys, const ReducedState& state,
                   const DynamicsOptions& opts = {});

/// dH/ds with p frozen, by central differences.
Vec hamiltonian_shape_gradient(const SystemDefinition& sys, const ReducedState& state,
                               const DynamicsOptions& opts = {});

/// (ds/dt, dp/dt) with ds/dt = K^{-1} p and
/// dp_i/dt = -dH/ds^i - sum_jk C_ij^k p_k ds^j/dt.
ReducedState vector_field(const SystemDefinition& sys, const ReducedState& state,
                          const DynamicsOptions& opts = {});

/// 2r x 2r matrix W of Omega_nh in the basis (d/ds, d/dp), Omega(U, V) = U^T W V:
///   W = [[Ctil, I], [-I, 0]],  Ctil_ij = sum_k C_ij^k p_k.
/// The covector i_X Omega is W^T X.
Mat nh_form_matrix(const SystemDefinition& sys, const ReducedState& state,
                   const DynamicsOptions& opts = {});

struct Sample {
  double t = 0.0;
  ReducedState state;
  double H = 0.0;
  /// Reparametrized time, present for Hamiltonised runs.
  std::optional<double> tau;
};

struct Trajectory {
  std::vector<Sample> samples;
  /// Extra per-sample channels keyed by name; each has samples.size() entries.
  std::map<std::string, std::vector<double>> channels;
  std::string integrator;
  double step_or_tol = 0.0;
  std::string system_label;
};

enum class Method { kRk4, kRk45 };

struct IntegrateOptions {
  Method method = Method::kRk45;
  /// Fixed step for rk4.
  double dt = 1e-3;
  /// Local error tolerance for rk45 (absolute and relative).
  double tol = 1e-9;
  double min_step = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  /// First trial step for rk45; kAutoStep picks one from the initial derivative.
  double initial_step = numkit::kAutoStep;
  /// Keep every k-th accepted step (the final state is always kept).
  std::size_t sample_stride = 1;
  DynamicsOptions dynamics;
};

/// The trajectory left the shape chart. Carries the last valid state and the
/// samples recorded up to that point.
class DomainExit : public Error {
 public:
  DomainExit(const std::string& what, ReducedState last_state, double t, Trajectory partial)
      : Error(what), last_state_(std::move(last_state)), t_(t), partial_(std::move(partial)) {}

  const ReducedState& last_state() const noexcept { return last_state_; }
  double t() const noexcept { return t_; }
  const Trajectory& partial() const noexcept { return partial_; }

 private:
  ReducedState last_state_;
  double t_;
  Trajectory partial_;
};

/// Integrates the reduced field from t = 0 to t_end.
Trajectory integrate(const SystemDefinition& sys, const ReducedState& state0, double t_end,
                     const IntegrateOptions& opts = {});

/// State at time t by cubic Hermite interpolation between the bracketing
/// samples, using the reduced field for the end-point derivatives.
ReducedState state_at_time(const SystemDefinition& sys, const Trajectory& traj, double t,
                           const DynamicsOptions& opts = {});

/// A conformal factor candidate phi on the chart, optionally with its gradient.
struct PhiFunction {
  ScalarMap value;
  std::optional<VectorMap> gradient;

  double operator()(const Vec& s) const { return value(s); }
  /// Analytic gradient when available, otherwise central differences.
  Vec grad(const Vec& s, double h = numkit::kAutoStep) const;

  static PhiFunction zero();
};

/// Chaplygin Hamiltonisation: Darboux rescaling p~ = e^phi p and the time
/// change dt = e^{-phi} dtau. In (s, p~) the flow in tau is canonical with
/// Hamiltonian H~(s, p~) = H(s, e^{-phi} p~) when e^phi Omega_nh is closed.
class HamiltonisedSystem {
 public:
  HamiltonisedSystem(SystemDefinition base, PhiFunction phi, DynamicsOptions opts = {});

  const SystemDefinition& base() const noexcept { return base_; }
  const PhiFunction& phi() const noexcept { return phi_; }
  const DynamicsOptions& options() const noexcept { return opts_; }

  /// (s, p) -> (s, e^phi p).
  ReducedState forward(const ReducedState& physical) const;
  /// (s, p~) -> (s, e^-phi p~).
  ReducedState inverse(const ReducedState& darboux) const;

  double hamiltonian(const ReducedState& darboux) const;
  /// dt/dtau = e^{-phi(s)}.
  double time_density(const Vec& s) const;

  /// Canonical field in tau: ds/dtau = dH~/dp~, dp~/dtau = -dH~/ds.
  ReducedState field(const ReducedState& darboux) const;

 private:
  SystemDefinition base_;
  PhiFunction phi_;
  DynamicsOptions opts_;
};

HamiltonisedSystem hamiltonise(const SystemDefinition& sys, PhiFunction phi,
                               const DynamicsOptions& opts = {});

struct SymplecticOptions {
  double dtau = 1e-3;
  /// Fixed-point iteration stops when the update falls below this (max norm).
  double fp_tol = 1e-12;
  int max_iter = 50;
  std::size_t sample_stride = 1;
  /// Stop once physical time reaches this value (the last step crosses it).
  std::optional<double> t_stop;
};

/// Implicit midpoint in (s, p~) for H~, physical time by the trapezoid rule on
/// e^{-phi}. state0 is physical; samples are mapped back to physical momenta
/// and carry both t and tau.
Trajectory integrate_symplectic(const HamiltonisedSystem& hsys, const ReducedState& state0,
                                double tau_end, const SymplecticOptions& opts = {});

}  // namespace chaplygin
