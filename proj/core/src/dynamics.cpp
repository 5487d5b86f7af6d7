#include "chaplygin/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace chaplygin {

double hamiltonian(const SystemDefinition& sys, const ReducedState& state,
                   const DynamicsOptions& opts) {
  if (state.p.size() != sys.shape_dim) throw DimensionMismatch("hamiltonian: momentum length");
  const ReducedMetric km = reduced_metric(sys, state.s, opts.geometry);
  return 0.5 * state.p.dot(km.K_inv * state.p) + sys.potential_at(state.s);
}

Vec hamiltonian_shape_gradient(const SystemDefinition& sys, const ReducedState& state,
                               const DynamicsOptions& opts) {
  if (state.p.size() != sys.shape_dim) throw DimensionMismatch("hamiltonian: momentum length");
  // Differences of K^{-1} and U taken separately: the result is then an exact
  // quadratic form in p, which keeps p-derivatives of the field clean.
  const Index r = sys.shape_dim;
  const double h = opts.fd_step > 0.0 ? opts.fd_step : numkit::default_fd_step(state.s);
  Vec grad(r);
  for (Index i = 0; i < r; ++i) {
    Vec sp = state.s, sm = state.s;
    sp(i) += h;
    sm(i) -= h;
    const Mat dKinv = (reduced_metric(sys, sp, opts.geometry).K_inv -
                       reduced_metric(sys, sm, opts.geometry).K_inv) / (2.0 * h);
    const double dU = (sys.potential_at(sp) - sys.potential_at(sm)) / (2.0 * h);
    grad(i) = 0.5 * state.p.dot(dKinv * state.p) + dU;
    if (!std::isfinite(grad(i))) {
      throw NonFiniteEvaluation("hamiltonian_shape_gradient: non-finite derivative", i);
    }
  }
  return grad;
}

ReducedState vector_field(const SystemDefinition& sys, const ReducedState& state,
                          const DynamicsOptions& opts) {
  if (state.p.size() != sys.shape_dim) throw DimensionMismatch("vector_field: momentum length");
  const ReducedMetric km = reduced_metric(sys, state.s, opts.geometry);
  const Vec sdot = km.K_inv * state.p;
  const Mat Ct = gyroscopic_coefficients(sys, state.s, opts.geometry).contract(state.p);
  const Vec pdot = -hamiltonian_shape_gradient(sys, state, opts) - Ct * sdot;
  return ReducedState{sdot, pdot};
}

Mat nh_form_matrix(const SystemDefinition& sys, const ReducedState& state,
                   const DynamicsOptions& opts) {
  const Index r = sys.shape_dim;
  Mat W = Mat::Zero(2 * r, 2 * r);
  W.topLeftCorner(r, r) = gyro_two_form(sys, state, opts.geometry);
  W.topRightCorner(r, r) = Mat::Identity(r, r);
  W.bottomLeftCorner(r, r) = -Mat::Identity(r, r);
  return W;
}

namespace {

constexpr double kStagnationFactor = 1e3;
constexpr double kRoundoff = 4.0 * std::numeric_limits<double>::epsilon();

Sample make_sample(const SystemDefinition& sys, double t, const Vec& z,
                   const DynamicsOptions& opts) {
  ReducedState st = ReducedState::unpack(z);
  const double H = hamiltonian(sys, st, opts);
  return Sample{t, std::move(st), H, std::nullopt};
}

Vec packed_field(const SystemDefinition& sys, const Vec& z, const DynamicsOptions& opts) {
  return vector_field(sys, ReducedState::unpack(z), opts).packed();
}

[[noreturn]] void domain_exit(const SystemDefinition& sys, const std::string& why,
                              const Vec& last_z, double t, Trajectory&& traj) {
  throw DomainExit(sys.label + ": trajectory left the chart at t = " + std::to_string(t) +
                       " (" + why + ")",
                   ReducedState::unpack(last_z), t, std::move(traj));
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 6> kC = {1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[6][6] = {
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Fifth-order weights are the last row of kA; these are b5 - b4.
constexpr std::array<double, 7> kE = {71.0 / 57600,  0.0,          -71.0 / 16695, 71.0 / 1920,
                                      -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

Trajectory integrate_rk4(const SystemDefinition& sys, const Vec& z0, double t_end,
                         const IntegrateOptions& opts) {
  if (!(opts.dt > 0.0)) throw InvalidParams("integrate: rk4 needs dt > 0");
  Trajectory traj;
  traj.integrator = "rk4";
  traj.step_or_tol = opts.dt;
  traj.system_label = sys.label;
  const auto& dop = opts.dynamics;
  traj.samples.push_back(make_sample(sys, 0.0, z0, dop));

  const auto steps = static_cast<std::size_t>(std::ceil(t_end / opts.dt - 1e-9));
  Vec z = z0;
  double t = 0.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t_next = (n == steps) ? t_end : static_cast<double>(n) * opts.dt;
    const double h = t_next - t;
    Vec z_next;
    try {
      const Vec k1 = packed_field(sys, z, dop);
      const Vec k2 = packed_field(sys, z + 0.5 * h * k1, dop);
      const Vec k3 = packed_field(sys, z + 0.5 * h * k2, dop);
      const Vec k4 = packed_field(sys, z + h * k3, dop);
      z_next = z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (!sys.domain.contains(z_next.head(sys.shape_dim))) {
        domain_exit(sys, sys.domain.description, z, t, std::move(traj));
      }
      if (n % opts.sample_stride == 0 || n == steps) {
        traj.samples.push_back(make_sample(sys, t_next, z_next, dop));
      }
    } catch (const ChartFloorViolation& e) {
      domain_exit(sys, e.what(), z, t, std::move(traj));
    }
    z = std::move(z_next);
    t = t_next;
  }
  return traj;
}

double error_norm(const Vec& err, const Vec& y0, const Vec& y1, double tol) {
  double acc = 0.0;
  for (Index i = 0; i < err.size(); ++i) {
    const double sc = tol + tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    acc += (err(i) / sc) * (err(i) / sc);
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

Trajectory integrate_rk45(const SystemDefinition& sys, const Vec& z0, double t_end,
                          const IntegrateOptions& opts) {
  if (!(opts.tol > 0.0)) throw InvalidParams("integrate: rk45 needs tol > 0");
  Trajectory traj;
  traj.integrator = "rk45";
  traj.step_or_tol = opts.tol;
  traj.system_label = sys.label;
  const auto& dop = opts.dynamics;
  traj.samples.push_back(make_sample(sys, 0.0, z0, dop));

  Vec z = z0;
  double t = 0.0;
  Vec k[7];
  try {
    k[0] = packed_field(sys, z, dop);
  } catch (const ChartFloorViolation& e) {
    domain_exit(sys, e.what(), z, t, std::move(traj));
  }

  double h = opts.initial_step;
  if (h == numkit::kAutoStep) {
    const double zn = std::max(1.0, z.lpNorm<Eigen::Infinity>());
    const double fn = k[0].lpNorm<Eigen::Infinity>();
    h = fn > 0.0 ? 0.01 * std::pow(opts.tol, 0.2) * zn / fn : 1e-3;
    h = std::clamp(h, 1e-6, 0.1);
  }
  h = std::min({h, opts.max_step, t_end});

  std::size_t accepted = 0;
  while (t < t_end) {
    const bool last = t + h >= t_end * (1.0 - 1e-14);
    if (last) h = t_end - t;
    if (h < opts.min_step) {
      throw StepSizeUnderflow(sys.label + ": adaptive step " + std::to_string(h) +
                              " below minimum at t = " + std::to_string(t));
    }
    Vec z_new;
    double err = 0.0;
    bool stage_outside = false;
    try {
      for (int s = 1; s < 7; ++s) {
        Vec zs = z;
        for (int j = 0; j < s; ++j) {
          if (kA[s - 1][j] != 0.0) zs += h * kA[s - 1][j] * k[j];
        }
        if (s == 6) z_new = zs;
        k[s] = packed_field(sys, zs, dop);
      }
      Vec e = Vec::Zero(z.size());
      for (int j = 0; j < 7; ++j) e += h * kE[static_cast<std::size_t>(j)] * k[j];
      err = error_norm(e, z, z_new, opts.tol);
      if (!std::isfinite(err)) err = 1e10;
    } catch (const ChartFloorViolation&) {
      stage_outside = true;
    }

    if (stage_outside) {
      // Either the step overshoots the chart or the flow truly exits; shrink
      // until the step underflows, which signals the latter.
      if (h * 0.25 < opts.min_step) domain_exit(sys, sys.domain.description, z, t, std::move(traj));
      h *= 0.25;
      continue;
    }

    if (err <= 1.0) {
      t = last ? t_end : t + h;
      z = std::move(z_new);
      k[0] = k[6];  // FSAL
      ++accepted;
      if (!sys.domain.contains(z.head(sys.shape_dim))) {
        domain_exit(sys, sys.domain.description, z, t, std::move(traj));
      }
      if (accepted % opts.sample_stride == 0 || t >= t_end) {
        traj.samples.push_back(make_sample(sys, t, z, dop));
      }
      const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h *= std::clamp(fac, 0.2, 5.0);
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
    }
    h = std::min(h, opts.max_step);
  }
  return traj;
}

}  // namespace

Trajectory integrate(const SystemDefinition& sys, const ReducedState& state0, double t_end,
                     const IntegrateOptions& opts) {
  if (!(t_end > 0.0)) throw InvalidParams("integrate: t_end must be positive");
  if (state0.s.size() != sys.shape_dim || state0.p.size() != sys.shape_dim) {
    throw DimensionMismatch("integrate: initial state has wrong length");
  }
  if (!state0.s.allFinite() || !state0.p.allFinite()) {
    throw InvalidParams("integrate: initial state is not finite");
  }
  if (!sys.domain.contains(state0.s)) {
    throw ChartFloorViolation(sys.label + ": initial shape point outside chart (" +
                              sys.domain.description + ")");
  }
  if (opts.sample_stride == 0) throw InvalidParams("integrate: sample_stride must be >= 1");
  const Vec z0 = state0.packed();
  return opts.method == Method::kRk4 ? integrate_rk4(sys, z0, t_end, opts)
                                     : integrate_rk45(sys, z0, t_end, opts);
}

ReducedState state_at_time(const SystemDefinition& sys, const Trajectory& traj, double t,
                           const DynamicsOptions& opts) {
  const auto& smp = traj.samples;
  if (smp.empty()) throw InvalidParams("state_at_time: empty trajectory");
  if (t < smp.front().t || t > smp.back().t) {
    throw InvalidParams("state_at_time: t outside the trajectory span");
  }
  auto it = std::upper_bound(smp.begin(), smp.end(), t,
                             [](double v, const Sample& s) { return v < s.t; });
  if (it == smp.end()) return smp.back().state;
  if (it == smp.begin()) return smp.front().state;
  const Sample& b = *it;
  const Sample& a = *(it - 1);
  const double h = b.t - a.t;
  if (h <= 0.0) return a.state;
  const double u = (t - a.t) / h;
  const Vec ya = a.state.packed();
  const Vec yb = b.state.packed();
  const Vec fa = vector_field(sys, a.state, opts).packed();
  const Vec fb = vector_field(sys, b.state, opts).packed();
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u);
  const double h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u);
  const double h11 = u * u * (u - 1);
  return ReducedState::unpack(h00 * ya + h10 * h * fa + h01 * yb + h11 * h * fb);
}

Vec PhiFunction::grad(const Vec& s, double h) const {
  if (gradient) return (*gradient)(s);
  return numkit::fd_gradient(value, s, h);
}

PhiFunction PhiFunction::zero() {
  return PhiFunction{[](const Vec&) { return 0.0; },
                     VectorMap([](const Vec& s) { return Vec{Vec::Zero(s.size())}; })};
}

HamiltonisedSystem::HamiltonisedSystem(SystemDefinition base, PhiFunction phi,
                                       DynamicsOptions opts)
    : base_(std::move(base)), phi_(std::move(phi)), opts_(opts) {
  if (!phi_.value) throw InvalidParams("hamiltonise: phi has no value function");
}

ReducedState HamiltonisedSystem::forward(const ReducedState& physical) const {
  return ReducedState{physical.s, std::exp(phi_(physical.s)) * physical.p};
}

ReducedState HamiltonisedSystem::inverse(const ReducedState& darboux) const {
  return ReducedState{darboux.s, std::exp(-phi_(darboux.s)) * darboux.p};
}

double HamiltonisedSystem::hamiltonian(const ReducedState& darboux) const {
  return chaplygin::hamiltonian(base_, inverse(darboux), opts_);
}

double HamiltonisedSystem::time_density(const Vec& s) const { return std::exp(-phi_(s)); }

ReducedState HamiltonisedSystem::field(const ReducedState& darboux) const {
  const double ephi = std::exp(-phi_(darboux.s));
  const ReducedState phys{darboux.s, ephi * darboux.p};
  const ReducedMetric km = reduced_metric(base_, phys.s, opts_.geometry);
  const Vec v = km.K_inv * phys.p;
  // H~(s, p~) = H(s, e^-phi p~):
  //   dH~/dp~ = e^-phi K^-1 p,  dH~/ds = dH/ds|_p - (p . K^-1 p) grad phi
  const Vec dHds = hamiltonian_shape_gradient(base_, phys, opts_) -
                   phys.p.dot(v) * phi_.grad(phys.s, opts_.fd_step);
  return ReducedState{ephi * v, -dHds};
}

HamiltonisedSystem hamiltonise(const SystemDefinition& sys, PhiFunction phi,
                               const DynamicsOptions& opts) {
  return HamiltonisedSystem(sys, std::move(phi), opts);
}

Trajectory integrate_symplectic(const HamiltonisedSystem& hsys, const ReducedState& state0,
                                double tau_end, const SymplecticOptions& opts) {
  const SystemDefinition& sys = hsys.base();
  if (!(tau_end > 0.0) || !(opts.dtau > 0.0)) {
    throw InvalidParams("integrate_symplectic: tau_end and dtau must be positive");
  }
  if (opts.sample_stride == 0) throw InvalidParams("integrate_symplectic: sample_stride >= 1");
  if (state0.s.size() != sys.shape_dim || state0.p.size() != sys.shape_dim) {
    throw DimensionMismatch("integrate_symplectic: initial state has wrong length");
  }
  if (!sys.domain.contains(state0.s)) {
    throw ChartFloorViolation(sys.label + ": initial shape point outside chart");
  }
  const Index r = sys.shape_dim;

  Trajectory traj;
  traj.integrator = "implicit-midpoint";
  traj.step_or_tol = opts.dtau;
  traj.system_label = sys.label;

  auto record = [&](double t, double tau, const Vec& zt) {
    const ReducedState phys = hsys.inverse(ReducedState::unpack(zt));
    const double H = hamiltonian(sys, phys, hsys.options());
    traj.samples.push_back(Sample{t, phys, H, tau});
  };
  auto F = [&](const Vec& zt) { return hsys.field(ReducedState::unpack(zt)).packed(); };

  Vec z = hsys.forward(state0).packed();
  double t = 0.0;
  double tau = 0.0;
  double rho = hsys.time_density(z.head(r));
  traj.samples.push_back(Sample{t, state0, hamiltonian(sys, state0, hsys.options()), tau});
  Vec dz_prev = Vec::Zero(z.size());
  bool have_prev = false;

  const auto steps = static_cast<std::size_t>(std::ceil(tau_end / opts.dtau - 1e-9));
  for (std::size_t n = 1; n <= steps; ++n) {
    const double tau_next = (n == steps) ? tau_end : static_cast<double>(n) * opts.dtau;
    const double h = tau_next - tau;
    Vec z_next;
    double rho_next = 0.0;
    try {
      // Previous increment as the predictor; explicit Euler on the first step.
      z_next = have_prev ? Vec(z + dz_prev * (h / opts.dtau)) : Vec(z + h * F(z));
      bool converged = false;
      double prev_delta = std::numeric_limits<double>::infinity();
      for (int it = 0; it < opts.max_iter; ++it) {
        const Vec cand = z + h * F(0.5 * (z + z_next));
        const double delta = (cand - z_next).lpNorm<Eigen::Infinity>();
        z_next = cand;
        if (!z_next.allFinite()) break;
        const double scale = std::max(1.0, z_next.lpNorm<Eigen::Infinity>());
        if (delta <= opts.fp_tol * scale) converged = true;
        // Past the tolerance keep polishing down to the rounding floor: the
        // leftover iteration error has a consistent sign and would otherwise
        // accumulate as a linear energy drift. Increments that stop shrinking
        // while already tiny mean the floor of the FD field has been reached.
        const bool stalled = delta >= prev_delta || delta <= kRoundoff * scale;
        if (stalled && delta <= kStagnationFactor * opts.fp_tol * scale) converged = true;
        if (converged && stalled) break;
        prev_delta = delta;
      }
      if (!converged) {
        throw FixedPointDivergence(sys.label + ": implicit midpoint did not converge at tau = " +
                                   std::to_string(tau));
      }
      if (!sys.domain.contains(z_next.head(r))) {
        domain_exit(sys, sys.domain.description, hsys.inverse(ReducedState::unpack(z)).packed(),
                    t, std::move(traj));
      }
      rho_next = hsys.time_density(z_next.head(r));
    } catch (const ChartFloorViolation& e) {
      domain_exit(sys, e.what(), hsys.inverse(ReducedState::unpack(z)).packed(), t,
                  std::move(traj));
    }
    const double t_next = t + 0.5 * h * (rho + rho_next);
    dz_prev = z_next - z;
    have_prev = true;
    z = std::move(z_next);
    t = t_next;
    tau = tau_next;
    rho = rho_next;
    const bool stop = opts.t_stop && t >= *opts.t_stop;
    if (n % opts.sample_stride == 0 || n == steps || stop) record(t, tau, z);
    if (stop) break;
  }
  return traj;
}

}  // namespace chaplygin
