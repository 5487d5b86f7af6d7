#pragma once

// Built-in Chaplygin systems: the nonholonomic particle, the vertical rolling
// disk and the multi-dimensional Veselova problem with inertia
// I(u ^ v) = (Au) ^ (Av).

#include "chaplygin/system.hpp"

namespace chaplygin {

enum class ParticlePotential { kZero, kUa, kCustom };

struct ParticleParams {
  /// Coupling in the kinetic energy term a * ydot * zdot, |a| < 1.
  double a = 0.0;
  ParticlePotential potential = ParticlePotential::kZero;
  /// U(x, y) when potential == kCustom.
  ScalarMap custom_potential;
};

struct DiskParams {
  double m = 1.0;
  double I = 1.0;
  double J = 1.0;
  double R = 1.0;
  /// Optional U(phi, theta).
  ScalarMap potential;
};

enum class VeselovaRealization { kChart, kGroup };

struct VeselovaParams {
  Index n = 3;
  /// Diagonal of A, all entries positive.
  Vec A;
  /// Chart floor: the chart covers gamma_n >= delta.
  double delta = 0.1;
  VeselovaRealization realization = VeselovaRealization::kChart;
  /// Potential as a function of gamma = g^{-1} e_n; empty means zero.
  ScalarMap potential;
};

/// Q = R^3 (x, y, z), constraint zdot = y xdot, shape chart (x, y).
SystemDefinition make_nonholonomic_particle(const ParticleParams& params);

/// Q = R^2 x T^2 (x, y, phi, theta), shape chart (phi, theta).
SystemDefinition make_vertical_disk(const DiskParams& params);

/// Q = SO(n), shape S^{n-1} in the northern-hemisphere chart s = (gamma_1..gamma_{n-1}).
SystemDefinition make_veselova(const VeselovaParams& params);

namespace particle {

/// U_a(x, y) = 1/4 ln(1 + (1 - a^2) y^2).
double potential_ua(double a, const Vec& s);

/// -1/2 ln(1 + y^2); the phi of the a = 0 particle.
double phi_a0(const Vec& s);

}  // namespace particle

namespace veselova {

/// gamma = (s, sqrt(1 - |s|^2)). Throws ChartFloorViolation when |s| >= 1.
Vec gamma_from_shape(const Vec& s);

/// X_i(g) = gamma ^ (e_i - gamma_i/gamma_n e_n) with gamma = g^{-1} e_n (0-based i).
Mat frame_field(Index i, const Mat& g);

/// I(xi) = A xi A, the inertia operator with I(u ^ v) = (Au) ^ (Av).
Mat inertia(const Vec& A, const Mat& xi);

/// A rotation g with g^{-1} e_n = gamma: a Householder reflection taking e_n
/// to gamma composed with the reflection x_1 -> -x_1.
Mat section(const Vec& gamma);

/// Closed-form reduced metric K_kl over the chart.
Mat oracle_metric(const Vec& A, const Vec& gamma);

/// Closed-form gyroscopic coefficients
///   C_ij^k = (-gamma_j (a_j - a_n) delta_ik + gamma_i (a_i - a_n) delta_jk) / (A gamma, gamma).
GyroCoefficients oracle_gyro(const Vec& A, const Vec& gamma);

/// Closed-form <<[X_i, X_j], X_l>>; indices are 0-based in 0..n-2.
double oracle_bracket_pairing(const Vec& A, const Vec& gamma, Index i, Index j, Index l);

/// (e_i - gamma_i/gamma_n e_n) ^ (e_j - gamma_j/gamma_n e_n).
Mat oracle_frame_bracket(const Vec& gamma, Index i, Index j);

/// -1/2 ln(A gamma, gamma).
double phi(const Vec& A, const Vec& gamma);

/// U(gamma) = k (1 - gamma_n): minimum at the north pole, invariant under the
/// SO(n-1) isotropy of e_n.
ScalarMap axial_potential(double k);

}  // namespace veselova

}  // namespace chaplygin
