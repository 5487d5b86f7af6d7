#include "chaplygin/systems.hpp"

#include <cmath>
#include <string>

namespace chaplygin {

namespace particle {

double potential_ua(double a, const Vec& s) {
  return 0.25 * std::log1p((1.0 - a * a) * s(1) * s(1));
}

double phi_a0(const Vec& s) { return -0.5 * std::log1p(s(1) * s(1)); }

}  // namespace particle

SystemDefinition make_nonholonomic_particle(const ParticleParams& params) {
  const double a = params.a;
  if (!(std::abs(a) < 1.0)) throw InvalidParams("particle: |a| must be < 1");
  if (params.potential == ParticlePotential::kCustom && !params.custom_potential) {
    throw InvalidParams("particle: custom potential selected but not provided");
  }

  EuclideanModel model;
  model.ambient_dim = 3;
  model.frame = {
      [](const Vec& q) { return (Vec(3) << 1.0, 0.0, q(1)).finished(); },
      [](const Vec&) { return (Vec(3) << 0.0, 1.0, 0.0).finished(); },
  };
  // L = 1/2 (xdot^2 + ydot^2 + zdot^2) + a ydot zdot
  model.metric = [a](const Vec&) {
    Mat M = Mat::Identity(3, 3);
    M(1, 2) = M(2, 1) = a;
    return M;
  };
  model.section = [](const Vec& s) { return (Vec(3) << s(0), s(1), 0.0).finished(); };

  SystemDefinition sys;
  sys.label = "nonholonomic particle (a=" + std::to_string(a) + ")";
  sys.shape_dim = 2;
  sys.model = std::move(model);
  sys.domain = ShapeDomain::unbounded(2);
  switch (params.potential) {
    case ParticlePotential::kZero:
      break;
    case ParticlePotential::kUa:
      sys.potential = [a](const Vec& s) { return particle::potential_ua(a, s); };
      break;
    case ParticlePotential::kCustom:
      sys.potential = params.custom_potential;
      break;
  }
  if (a == 0.0) sys.known_phi = ScalarMap(particle::phi_a0);
  sys.validate();
  return sys;
}

SystemDefinition make_vertical_disk(const DiskParams& params) {
  if (!(params.m > 0 && params.I > 0 && params.J > 0 && params.R > 0)) {
    throw InvalidParams("disk: m, I, J, R must be positive");
  }
  const double R = params.R;
  EuclideanModel model;
  model.ambient_dim = 4;
  model.frame = {
      [](const Vec&) { return (Vec(4) << 0.0, 0.0, 1.0, 0.0).finished(); },
      [R](const Vec& q) {
        return (Vec(4) << R * std::cos(q(2)), R * std::sin(q(2)), 0.0, 1.0).finished();
      },
  };
  const Vec diag = (Vec(4) << params.m, params.m, params.I, params.J).finished();
  model.metric = [diag](const Vec&) { return Mat(diag.asDiagonal()); };
  model.section = [](const Vec& s) { return (Vec(4) << 0.0, 0.0, s(0), s(1)).finished(); };

  SystemDefinition sys;
  sys.label = "vertical rolling disk";
  sys.shape_dim = 2;
  sys.model = std::move(model);
  sys.domain = ShapeDomain::unbounded(2);
  sys.potential = params.potential;
  sys.known_phi = ScalarMap([](const Vec&) { return 0.0; });
  sys.validate();
  return sys;
}

namespace veselova {

Vec gamma_from_shape(const Vec& s) {
  const double rest = 1.0 - s.squaredNorm();
  if (!(rest > 0.0)) {
    throw ChartFloorViolation("veselova: shape point outside the northern hemisphere");
  }
  Vec gamma(s.size() + 1);
  gamma << s, std::sqrt(rest);
  return gamma;
}

Mat frame_field(Index i, const Mat& g) {
  const Index n = g.rows();
  const Vec gamma = g.row(n - 1).transpose();
  Vec dir = Vec::Zero(n);
  dir(i) = 1.0;
  dir(n - 1) = -gamma(i) / gamma(n - 1);
  return numkit::wedge(gamma, dir);
}

Mat inertia(const Vec& A, const Mat& xi) { return A.asDiagonal() * xi * A.asDiagonal(); }

Mat section(const Vec& gamma) {
  const Index n = gamma.size();
  Vec v = -gamma;
  v(n - 1) += 1.0;
  const double vv = v.squaredNorm();
  if (vv < 1e-28) return Mat::Identity(n, n);
  // g^{-1} = H S with H e_n = gamma and S = diag(-1, 1, ..., 1); det = +1.
  Mat g_inv = Mat::Identity(n, n) - (2.0 / vv) * v * v.transpose();
  g_inv.col(0) *= -1.0;
  return numkit::reorthonormalize(g_inv.transpose());
}

Mat oracle_metric(const Vec& A, const Vec& gamma) {
  const Index n = gamma.size();
  const Index r = n - 1;
  const double an = A(n - 1);
  const double gn = gamma(n - 1);
  const double agg = gamma.dot(A.cwiseProduct(gamma));
  Mat K(r, r);
  for (Index k = 0; k < r; ++k) {
    for (Index l = 0; l < r; ++l) {
      K(k, l) = agg * ((k == l ? A(l) : 0.0) + an * gamma(k) * gamma(l) / (gn * gn)) -
                gamma(k) * gamma(l) * (an - A(k)) * (an - A(l));
    }
  }
  return K;
}

GyroCoefficients oracle_gyro(const Vec& A, const Vec& gamma) {
  const Index n = gamma.size();
  const Index r = n - 1;
  const double an = A(n - 1);
  const double agg = gamma.dot(A.cwiseProduct(gamma));
  GyroCoefficients C(r, gamma.head(r));
  for (Index i = 0; i < r; ++i) {
    for (Index j = i + 1; j < r; ++j) {
      Vec col = Vec::Zero(r);
      col(i) += -gamma(j) * (A(j) - an) / agg;
      col(j) += gamma(i) * (A(i) - an) / agg;
      C.set_pair(i, j, col);
    }
  }
  return C;
}

double oracle_bracket_pairing(const Vec& A, const Vec& gamma, Index i, Index j, Index l) {
  const Index n = gamma.size();
  if (A.size() != n) throw DimensionMismatch("oracle_bracket_pairing: A and gamma differ");
  for (Index idx : {i, j, l}) {
    if (idx < 0 || idx >= n - 1) {
      throw IndexOutOfRange("oracle_bracket_pairing: index " + std::to_string(idx) +
                            " outside 0.." + std::to_string(n - 2));
    }
  }
  const double an = A(n - 1);
  const double gn = gamma(n - 1);
  return an * gamma(i) * gamma(j) * gamma(l) / (gn * gn) * (A(i) - A(j)) +
         (j == l ? A(j) * gamma(i) * (A(i) - an) : 0.0) -
         (i == l ? A(i) * gamma(j) * (A(j) - an) : 0.0);
}

Mat oracle_frame_bracket(const Vec& gamma, Index i, Index j) {
  const Index n = gamma.size();
  Vec u = Vec::Zero(n);
  Vec w = Vec::Zero(n);
  u(i) = 1.0;
  u(n - 1) = -gamma(i) / gamma(n - 1);
  w(j) = 1.0;
  w(n - 1) = -gamma(j) / gamma(n - 1);
  return numkit::wedge(u, w);
}

double phi(const Vec& A, const Vec& gamma) { return -0.5 * std::log(gamma.dot(A.cwiseProduct(gamma))); }

ScalarMap axial_potential(double k) {
  return [k](const Vec& gamma) { return k * (1.0 - gamma(gamma.size() - 1)); };
}

}  // namespace veselova

SystemDefinition make_veselova(const VeselovaParams& params) {
  const Index n = params.n;
  if (n < 3) throw InvalidParams("veselova: n must be at least 3");
  if (params.A.size() != n) throw InvalidParams("veselova: A must have n entries");
  if (!(params.A.array() > 0.0).all()) throw InvalidParams("veselova: A must be positive");
  if (!(params.delta > 0.0 && params.delta < 1.0)) {
    throw InvalidParams("veselova: chart floor delta must lie in (0, 1)");
  }
  const Vec A = params.A;
  const double delta = params.delta;
  const Index r = n - 1;

  SystemDefinition sys;
  sys.shape_dim = r;
  sys.domain.lower = Vec::Constant(r, -1.0);
  sys.domain.upper = Vec::Constant(r, 1.0);
  sys.domain.predicate = [delta](const Vec& s) { return 1.0 - s.squaredNorm() >= delta * delta; };
  sys.domain.description = "gamma_n >= " + std::to_string(delta);

  // Evaluating below the floor is an error even when called directly.
  auto gamma_checked = [delta](const Vec& s) {
    Vec gamma = veselova::gamma_from_shape(s);
    if (gamma(gamma.size() - 1) < delta) {
      throw ChartFloorViolation("veselova: gamma_n = " + std::to_string(gamma(gamma.size() - 1)) +
                                " below chart floor " + std::to_string(delta));
    }
    return gamma;
  };

  if (params.realization == VeselovaRealization::kChart) {
    ClosedFormModel model;
    model.metric = [A, gamma_checked](const Vec& s) {
      return veselova::oracle_metric(A, gamma_checked(s));
    };
    model.gyro = [A, gamma_checked](const Vec& s) {
      return veselova::oracle_gyro(A, gamma_checked(s));
    };
    sys.model = std::move(model);
    sys.label = "veselova n=" + std::to_string(n) + " (chart)";
  } else {
    GroupModel model;
    model.n = n;
    for (Index i = 0; i < r; ++i) {
      model.frame.push_back([i](const Mat& g) { return veselova::frame_field(i, g); });
    }
    model.inertia = [A](const Mat& xi) { return veselova::inertia(A, xi); };
    model.section = [gamma_checked](const Vec& s) { return veselova::section(gamma_checked(s)); };
    sys.model = std::move(model);
    sys.label = "veselova n=" + std::to_string(n) + " (group)";
  }

  if (params.potential) {
    sys.potential = [U = params.potential](const Vec& s) {
      return U(veselova::gamma_from_shape(s));
    };
  }
  sys.known_phi = ScalarMap([A](const Vec& s) {
    return veselova::phi(A, veselova::gamma_from_shape(s));
  });
  sys.validate();
  return sys;
}

}  // namespace chaplygin
