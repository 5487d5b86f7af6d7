#include "chaplygin/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "chaplygin/parallel.hpp"

namespace chaplygin {

Index SampleGrid::size() const {
  Index n = 1;
  for (const auto& a : axes) n *= a.points;
  return n;
}

std::vector<Index> SampleGrid::multi_index(Index flat) const {
  std::vector<Index> m(axes.size());
  for (std::size_t d = axes.size(); d-- > 0;) {
    m[d] = flat % axes[d].points;
    flat /= axes[d].points;
  }
  return m;
}

Index SampleGrid::flat_index(const std::vector<Index>& m) const {
  Index flat = 0;
  for (std::size_t d = 0; d < axes.size(); ++d) flat = flat * axes[d].points + m[d];
  return flat;
}

Vec SampleGrid::point(const std::vector<Index>& m) const {
  Vec x(dim());
  for (std::size_t d = 0; d < axes.size(); ++d) x(static_cast<Index>(d)) = axes[d].value(m[d]);
  return x;
}

SampleGrid SampleGrid::uniform(Index r, double lo, double hi, Index points) {
  SampleGrid g;
  g.axes.assign(static_cast<std::size_t>(r), GridAxis{lo, hi, points});
  return g;
}

void SampleGrid::validate() const {
  if (axes.empty()) throw InvalidParams("grid has no axes");
  for (std::size_t d = 0; d < axes.size(); ++d) {
    if (axes[d].points < 3) {
      throw InvalidParams("grid axis " + std::to_string(d) + " needs at least 3 points");
    }
    if (!(axes[d].lo < axes[d].hi)) {
      throw InvalidParams("grid axis " + std::to_string(d) + " must have lo < hi");
    }
  }
}

namespace {

// 8-point Gauss-Legendre on [-1, 1], nodes +-x_q.
constexpr std::array<double, 4> kGaussNodes = {0.1834346424956498, 0.5255324099163290,
                                               0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGaussWeights = {0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

double nested_step(const Vec& x, double requested) {
  return requested == numkit::kAutoStep ? numkit::nested_fd_step(x) : requested;
}

struct NodeData {
  Vec value;
  double curl = 0.0;
  // Integral of the d-th component along the edge to the next node on axis d;
  // NaN on the last node of the axis.
  std::vector<double> edge;
};

}  // namespace

ExactnessReport check_exactness(const VectorMap& covector, const SampleGrid& grid,
                                const DiagnosticsOptions& opts) {
  grid.validate();
  const Index r = grid.dim();
  const auto N = static_cast<std::size_t>(grid.size());
  std::vector<NodeData> nodes(N);

  parallel_for(N, opts.threads, [&](std::size_t flat) {
    const auto m = grid.multi_index(static_cast<Index>(flat));
    const Vec x = grid.point(m);
    NodeData nd;
    nd.value = covector(x);
    if (nd.value.size() != r) throw DimensionMismatch("covector field has wrong length");

    const double h = nested_step(x, opts.curl_step);
    Mat J(r, r);  // J(i, k) = d_k F_i
    Vec xp = x;
    for (Index k = 0; k < r; ++k) {
      xp(k) = x(k) + h;
      const Vec fp = covector(xp);
      xp(k) = x(k) - h;
      const Vec fm = covector(xp);
      xp(k) = x(k);
      J.col(k) = (fp - fm) / (2.0 * h);
    }
    for (Index i = 0; i < r; ++i) {
      for (Index j = i + 1; j < r; ++j) nd.curl = std::max(nd.curl, std::abs(J(j, i) - J(i, j)));
    }

    nd.edge.assign(static_cast<std::size_t>(r), std::numeric_limits<double>::quiet_NaN());
    for (Index d = 0; d < r; ++d) {
      const auto& ax = grid.axes[static_cast<std::size_t>(d)];
      if (m[static_cast<std::size_t>(d)] + 1 >= ax.points) continue;
      const double len = ax.spacing();
      double acc = 0.0;
      Vec y = x;
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        for (double sign : {-1.0, 1.0}) {
          y(d) = x(d) + 0.5 * len * (1.0 + sign * kGaussNodes[q]);
          acc += kGaussWeights[q] * covector(y)(d);
        }
      }
      nd.edge[static_cast<std::size_t>(d)] = 0.5 * len * acc;
    }
    nodes[flat] = std::move(nd);
  });

  ExactnessReport rep;
  for (const auto& nd : nodes) rep.curl_residual_max = std::max(rep.curl_residual_max, nd.curl);

  auto edge = [&](std::vector<Index> m, Index d) {
    return nodes[static_cast<std::size_t>(grid.flat_index(m))].edge[static_cast<std::size_t>(d)];
  };

  for (Index i = 0; i < r; ++i) {
    for (Index j = i + 1; j < r; ++j) {
      const double area = grid.axes[static_cast<std::size_t>(i)].spacing() *
                          grid.axes[static_cast<std::size_t>(j)].spacing();
      for (std::size_t flat = 0; flat < N; ++flat) {
        auto m = grid.multi_index(static_cast<Index>(flat));
        if (m[static_cast<std::size_t>(i)] + 1 >= grid.axes[static_cast<std::size_t>(i)].points ||
            m[static_cast<std::size_t>(j)] + 1 >= grid.axes[static_cast<std::size_t>(j)].points) {
          continue;
        }
        auto mi = m;
        ++mi[static_cast<std::size_t>(i)];
        auto mj = m;
        ++mj[static_cast<std::size_t>(j)];
        const double loop = edge(m, i) + edge(mi, j) - edge(mj, i) - edge(m, j);
        const double res = std::abs(loop) / area;
        rep.loop_residuals.push_back(res);
        rep.loop_residual_max = std::max(rep.loop_residual_max, res);
      }
    }
  }

  rep.is_exact = rep.curl_residual_max <= opts.tol && rep.loop_residual_max <= opts.tol;
  if (rep.is_exact) {
    // Axis-ordered path: along axis 0 from the origin, then axis 1, ...
    std::vector<double> sigma(N, 0.0);
    for (std::size_t flat = 0; flat < N; ++flat) {
      const auto target = grid.multi_index(static_cast<Index>(flat));
      std::vector<Index> cur(static_cast<std::size_t>(r), 0);
      double acc = 0.0;
      for (Index d = 0; d < r; ++d) {
        for (Index k = 0; k < target[static_cast<std::size_t>(d)]; ++k) {
          acc += edge(cur, d);
          ++cur[static_cast<std::size_t>(d)];
        }
      }
      sigma[flat] = acc;
    }
    rep.sigma_samples = std::move(sigma);
  }
  return rep;
}

ExactnessReport check_exactness_theta(const SystemDefinition& sys, const SampleGrid& grid,
                                      const DiagnosticsOptions& opts) {
  const GeometryOptions geo = opts.dynamics.geometry;
  return check_exactness([&sys, geo](const Vec& s) { return theta(sys, s, geo); }, grid, opts);
}

PhiGradientEstimate phi_gradient_estimate(const GyroCoefficients& C) {
  const Index r = C.r();
  PhiGradientEstimate est;
  est.gradient = Vec::Zero(r);
  for (Index i = 0; i < r; ++i) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (Index j = 0; j < r; ++j) {
      if (j == i) continue;
      const double v = -C(i, j, j);
      est.gradient(i) += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    est.gradient(i) /= static_cast<double>(r - 1);
    est.consistency_residual = std::max(est.consistency_residual, hi - lo);
    for (Index j = 0; j < r; ++j) {
      for (Index k = 0; k < r; ++k) {
        if (k != i && k != j) est.pattern_residual = std::max(est.pattern_residual, std::abs(C(i, j, k)));
      }
    }
  }
  return est;
}

PhiGradientEstimate phi_gradient_estimate(const SystemDefinition& sys, const Vec& s,
                                          const DiagnosticsOptions& opts) {
  return phi_gradient_estimate(gyroscopic_coefficients(sys, s, opts.dynamics.geometry));
}

PhiSimpleReport detect_phi_simple(const SystemDefinition& sys, const SampleGrid& grid,
                                  const DiagnosticsOptions& opts) {
  grid.validate();
  const auto N = static_cast<std::size_t>(grid.size());
  std::vector<PhiGradientEstimate> est(N);
  parallel_for(N, opts.threads, [&](std::size_t flat) {
    est[flat] = phi_gradient_estimate(sys, grid.point(static_cast<Index>(flat)), opts);
  });

  PhiSimpleReport rep;
  rep.pattern_test_vacuous = sys.shape_dim == 2;
  rep.grad_phi_samples.reserve(N);
  for (auto& e : est) {
    rep.pattern_residual_max = std::max(rep.pattern_residual_max, e.pattern_residual);
    rep.consistency_residual_max = std::max(rep.consistency_residual_max, e.consistency_residual);
    rep.grad_phi_samples.push_back(std::move(e.gradient));
  }

  rep.gradient_exactness = check_exactness(
      [&sys, &opts](const Vec& s) { return phi_gradient_estimate(sys, s, opts).gradient; }, grid,
      opts);
  rep.phi_samples = rep.gradient_exactness.sigma_samples;
  rep.is_phi_simple = rep.pattern_residual_max <= opts.tol &&
                      rep.consistency_residual_max <= opts.tol && rep.gradient_exactness.is_exact;
  return rep;
}

PhiFunction reconstructed_phi(const SystemDefinition& sys, const Vec& base,
                              const DiagnosticsOptions& opts) {
  auto grad = [&sys, opts](const Vec& s) { return phi_gradient_estimate(sys, s, opts).gradient; };
  PhiFunction phi;
  phi.gradient = VectorMap(grad);
  // Composite rule with segments of length <= kSegment keeps the value
  // consistent with the supplied gradient to roundoff.
  constexpr double kSegment = 0.25;
  phi.value = [grad, base](const Vec& s) {
    const Vec d = s - base;
    const int segments = std::max(1, static_cast<int>(std::ceil(d.norm() / kSegment)));
    const Vec step = d / static_cast<double>(segments);
    double acc = 0.0;
    for (int k = 0; k < segments; ++k) {
      const Vec start = base + static_cast<double>(k) * step;
      for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
        for (double sign : {-1.0, 1.0}) {
          const double u = 0.5 * (1.0 + sign * kGaussNodes[q]);
          acc += 0.5 * kGaussWeights[q] * grad(start + u * step).dot(step);
        }
      }
    }
    return acc;
  };
  return phi;
}

LiouvilleTerms liouville_terms(const SystemDefinition& sys, const ReducedState& state, double h,
                               const DynamicsOptions& opts) {
  const Vec z = state.packed();
  if (h == numkit::kAutoStep) h = numkit::nested_fd_step(z);
  double div = 0.0;
  Vec zp = z;
  for (Index c = 0; c < z.size(); ++c) {
    zp(c) = z(c) + h;
    const double fp = vector_field(sys, ReducedState::unpack(zp), opts).packed()(c);
    zp(c) = z(c) - h;
    const double fm = vector_field(sys, ReducedState::unpack(zp), opts).packed()(c);
    zp(c) = z(c);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NonFiniteEvaluation("liouville_terms: non-finite field value", c);
    }
    div += (fp - fm) / (2.0 * h);
  }
  const ReducedMetric km = reduced_metric(sys, state.s, opts.geometry);
  const double lift = theta(sys, state.s, opts.geometry).dot(km.K_inv * state.p);
  return LiouvilleTerms{div, lift};
}

double liouville_residual(const SystemDefinition& sys, const ReducedState& state, double h,
                          const DynamicsOptions& opts) {
  return liouville_terms(sys, state, h, opts).residual();
}

double measure_audit(const SystemDefinition& sys, const ReducedState& state,
                     const PhaseScalar& sigma_bar, double h, const DynamicsOptions& opts) {
  const Vec X = vector_field(sys, state, opts).packed();
  const Vec grad = numkit::fd_gradient(
      [&sigma_bar](const Vec& z) { return sigma_bar(ReducedState::unpack(z)); }, state.packed(), h);
  const ReducedMetric km = reduced_metric(sys, state.s, opts.geometry);
  const double lift = theta(sys, state.s, opts.geometry).dot(km.K_inv * state.p);
  return grad.dot(X) - lift;
}

Mat conformal_closedness_residual(const SystemDefinition& sys, const PhiFunction& phi,
                                  const ReducedState& state, const DynamicsOptions& opts) {
  const Mat Ct = gyro_two_form(sys, state, opts.geometry);
  const Vec g = phi.grad(state.s, opts.fd_step);
  const Vec& p = state.p;
  return Ct - (p * g.transpose() - g * p.transpose());
}

std::vector<double> trajectory_measure_drift(const SystemDefinition& sys, const Trajectory& traj,
                                             const ScalarMap& sigma,
                                             const DiagnosticsOptions& opts) {
  const auto& smp = traj.samples;
  const std::size_t n = smp.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const auto& dop = opts.dynamics;
  auto div_at = [&](const ReducedState& st) {
    return liouville_terms(sys, st, opts.curl_step, dop).divergence;
  };

  std::vector<double> div_node(n, 0.0);
  std::vector<double> div_mid(n, 0.0);  // entry k covers [t_{k-1}, t_k]
  parallel_for(n, opts.threads, [&](std::size_t k) {
    div_node[k] = div_at(smp[k].state);
    if (k == 0) return;
    const Sample& a = smp[k - 1];
    const Sample& b = smp[k];
    const double h = b.t - a.t;
    const Vec fa = vector_field(sys, a.state, dop).packed();
    const Vec fb = vector_field(sys, b.state, dop).packed();
    const Vec mid = 0.5 * (a.state.packed() + b.state.packed()) + (h / 8.0) * (fa - fb);
    div_mid[k] = div_at(ReducedState::unpack(mid));
  });

  const double sigma0 = sigma(smp.front().state.s);
  double integral = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double h = smp[k].t - smp[k - 1].t;
    integral += h / 6.0 * (div_node[k - 1] + 4.0 * div_mid[k] + div_node[k]);
    out[k] = integral + sigma(smp[k].state.s) - sigma0;
  }
  return out;
}

ResidualStats residual_stats(const std::vector<double>& values) {
  ResidualStats st;
  st.count = values.size();
  if (values.empty()) return st;
  double sum = 0.0;
  double sq = 0.0;
  for (double v : values) {
    st.max_abs = std::max(st.max_abs, std::abs(v));
    sum += std::abs(v);
    sq += v * v;
  }
  st.mean_abs = sum / static_cast<double>(values.size());
  st.rms = std::sqrt(sq / static_cast<double>(values.size()));
  return st;
}

std::vector<ReducedState> sample_states(const SampleGrid& box, std::size_t count,
                                        std::uint64_t seed, double p_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Index r = box.dim();
  std::vector<ReducedState> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    Vec s(r);
    Vec p(r);
    for (Index d = 0; d < r; ++d) {
      const auto& ax = box.axes[static_cast<std::size_t>(d)];
      s(d) = ax.lo + (ax.hi - ax.lo) * unit(rng);
    }
    for (Index d = 0; d < r; ++d) p(d) = p_scale * (2.0 * unit(rng) - 1.0);
    out.push_back(ReducedState{s, p});
  }
  return out;
}

DiagnosticsReport diagnose(const SystemDefinition& sys, const SampleGrid& grid,
                           const std::vector<ReducedState>& states,
                           const DiagnosticsOptions& opts) {
  DiagnosticsReport rep;
  rep.theta = check_exactness_theta(sys, grid, opts);
  rep.phi = detect_phi_simple(sys, grid, opts);

  std::vector<double> liou(states.size(), 0.0);
  std::vector<double> conf(states.size(), 0.0);
  const PhiFunction phi = reconstructed_phi(sys, grid.point(Index{0}), opts);
  parallel_for(states.size(), opts.threads, [&](std::size_t k) {
    liou[k] = liouville_residual(sys, states[k], opts.curl_step, opts.dynamics);
    conf[k] = conformal_closedness_residual(sys, phi, states[k], opts.dynamics)
                  .cwiseAbs()
                  .maxCoeff();
  });
  rep.liouville = residual_stats(liou);
  rep.conformal_residual_max = residual_stats(conf).max_abs;
  return rep;
}

}  // namespace chaplygin
