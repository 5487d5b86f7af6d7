// Acceptance suite: every criterion runs at its stated tolerance and runtime
// budget and prints one PASS/FAIL line. Exit status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "chaplygin/diagnostics.hpp"
#include "chaplygin/systems.hpp"

namespace {

using namespace chaplygin;

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

struct Outcome {
  bool ok = true;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> body;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void add(Outcome& out, bool ok, const std::string& what) {
  out.ok = out.ok && ok;
  if (!out.detail.empty()) out.detail += "; ";
  out.detail += what + (ok ? "" : " [violated]");
}

SystemDefinition veselova(Index n, VeselovaRealization realization = VeselovaRealization::kChart,
                          ScalarMap potential = {}) {
  VeselovaParams p;
  p.n = n;
  p.A = Vec::LinSpaced(n, 1.0, static_cast<double>(n));
  p.realization = realization;
  p.potential = std::move(potential);
  return make_veselova(p);
}

double max_error_up_to_constant(const std::vector<double>& got, const SampleGrid& grid, const ScalarMap& exact) {
  std::vector<double> diff(got.size());
  for (std::size_t k = 0; k < got.size(); ++k) diff[k] = got[k] - exact(grid.point(static_cast<Index>(k)));
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / static_cast<double>(diff.size());
  double err = 0.0;
  for (double d : diff) err = std::max(err, std::abs(d - mean));
  return err;
}

ScalarMap particle_phi() {
  return [](const Vec& s) { return -0.5 * std::log(1.0 + s(1) * s(1)); };
}

ScalarMap veselova_phi(Index n) {
  const Vec A = Vec::LinSpaced(n, 1.0, static_cast<double>(n));
  return [A](const Vec& s) { return oracle::veselova_phi(A, oracle::gamma(s)); };
}

// ---------------------------------------------------------------------------

Outcome disk_nullity() {
  const auto sys = make_vertical_disk({1.3, 0.6, 0.9, 0.7});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) worst = std::max(worst, gyroscopic_coefficients(sys, v2(u(rng), u(rng))).max_abs());
  Outcome out;
  add(out, worst <= 1e-7, "max|C| = " + fmt("%.2e", worst) + " <= 1e-7");
  return out;
}

Outcome particle_gyro() {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (double a : {0.0, 0.3, 0.7}) {
    const auto sys = make_nonholonomic_particle({a});
    for (int k = 0; k < 100; ++k) {
      const Vec s = v2(u(rng), u(rng));
      const auto C = gyroscopic_coefficients(sys, s);
      const Eigen::Vector2d c = oracle::particle_C12(a, s(1));
      for (Index i = 0; i < 2; ++i)
        for (Index j = 0; j < 2; ++j)
          for (Index l = 0; l < 2; ++l) {
            const double expect = i == j ? 0.0 : (i < j ? 1.0 : -1.0) * c(l);
            worst = std::max(worst, std::abs(C(i, j, l) - expect));
          }
    }
  }
  Outcome out;
  add(out, worst <= 1e-6, "max error = " + fmt("%.2e", worst) + " <= 1e-6");
  return out;
}

Outcome particle_dichotomy() {
  using clock = std::chrono::steady_clock;
  const auto grid = SampleGrid::uniform(2, -1.0, 1.0, 21);
  Outcome out;
  auto t0 = clock::now();
  const auto exact = check_exactness_theta(make_nonholonomic_particle({0.0}), grid);
  const double dt0 = std::chrono::duration<double>(clock::now() - t0).count();
  add(out, exact.is_exact, std::string("a=0 exact=") + (exact.is_exact ? "true" : "false"));
  if (exact.sigma_samples) {
    const double err = max_error_up_to_constant(*exact.sigma_samples, grid, particle_phi());
    add(out, err <= 1e-5, "sigma error = " + fmt("%.2e", err) + " <= 1e-5");
  }
  t0 = clock::now();
  const auto inexact = check_exactness_theta(make_nonholonomic_particle({0.5}), grid);
  const double dt1 = std::chrono::duration<double>(clock::now() - t0).count();
  add(out, !inexact.is_exact && inexact.curl_residual_max >= 1e-2,
      "a=0.5 exact=" + std::string(inexact.is_exact ? "true" : "false") + ", curl max = " +
          fmt("%.3f", inexact.curl_residual_max) + " >= 1e-2");
  add(out, dt0 < 5.0 && dt1 < 5.0, "per-grid " + fmt("%.2fs", dt0) + " / " + fmt("%.2fs", dt1) + " < 5s");
  return out;
}

Outcome non_basic_measure() {
  const double a = 0.3;
  const auto sys = make_nonholonomic_particle({a, ParticlePotential::kUa, {}});
  const PhaseScalar sigma = [a](const ReducedState& x) { return a * x.s(0) + x.p(1) * x.p(1); };
  double worst = 0.0;
  for (const auto& x : sample_states(SampleGrid::uniform(2, -2.0, 2.0, 3), 100, 4))
    worst = std::max(worst, std::abs(measure_audit(sys, x, sigma)));
  Outcome out;
  add(out, worst <= 1e-6, "max audit = " + fmt("%.2e", worst) + " <= 1e-6");
  return out;
}

Outcome veselova_oracles() {
  Outcome out;
  for (Index n : {3, 4}) {
    const auto sys = veselova(n, VeselovaRealization::kGroup);
    const Vec A = Vec::LinSpaced(n, 1.0, static_cast<double>(n));
    std::mt19937_64 rng(50 + static_cast<unsigned>(n));
    double errC = 0.0, errK = 0.0, errB = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Vec s = oracle::hemisphere_point(rng, n - 1, 0.3);
      const Vec g = oracle::gamma(s);
      const auto C = gyroscopic_coefficients(sys, s);
      errK = std::max(errK, (reduced_metric(sys, s).K - oracle::veselova_K(A, g)).cwiseAbs().maxCoeff());
      const Mat q = veselova::section(g);
      for (int i = 0; i < n - 1; ++i)
        for (int j = 0; j < n - 1; ++j) {
          numkit::LeftTrivializedField Xi{[i](const Mat& h) { return veselova::frame_field(i, h); }, n};
          numkit::LeftTrivializedField Xj{[j](const Mat& h) { return veselova::frame_field(j, h); }, n};
          const Mat br = numkit::lie_bracket_left_trivialized(Xi, Xj, q);
          for (int l = 0; l < n - 1; ++l) {
            errC = std::max(errC, std::abs(C(i, j, l) - oracle::veselova_C(A, g, i, j, l)));
            const double pairing = numkit::killing_pairing(veselova::inertia(A, br), veselova::frame_field(l, q));
            errB = std::max(errB, std::abs(pairing - oracle::veselova_pairing(A, g, i, j, l)));
          }
        }
    }
    const std::string tag = "n=" + std::to_string(n) + " ";
    add(out, errC <= 1e-5, tag + "C err " + fmt("%.1e", errC));
    add(out, errK <= 1e-6, tag + "K err " + fmt("%.1e", errK));
    add(out, errB <= 1e-5, tag + "pairing err " + fmt("%.1e", errB));
  }
  return out;
}

Outcome phi_recovery() {
  Outcome out;
  struct Case {
    std::string tag;
    SystemDefinition sys;
    SampleGrid grid;
    ScalarMap phi;
  };
  const Case cases[] = {
      {"particle", make_nonholonomic_particle({0.0}), SampleGrid::uniform(2, -1.0, 1.0, 21), particle_phi()},
      {"veselova n=3", veselova(3), SampleGrid::uniform(2, -0.6, 0.6, 21), veselova_phi(3)},
      {"veselova n=4", veselova(4), SampleGrid::uniform(3, -0.5, 0.5, 11), veselova_phi(4)},
  };
  for (const auto& c : cases) {
    const auto rep = detect_phi_simple(c.sys, c.grid);
    if (!rep.is_phi_simple || !rep.phi_samples) {
      add(out, false, c.tag + " not detected as phi-simple");
      continue;
    }
    const double err = max_error_up_to_constant(*rep.phi_samples, c.grid, c.phi);
    add(out, err <= 1e-4, c.tag + " phi err " + fmt("%.1e", err));
  }
  return out;
}

Outcome liouville_identity() {
  Outcome out;
  const SystemDefinition systems[] = {make_nonholonomic_particle({0.0}),
                                      make_nonholonomic_particle({0.5, ParticlePotential::kUa, {}}),
                                      make_vertical_disk({}),
                                      veselova(3),
                                      veselova(3, VeselovaRealization::kGroup),
                                      veselova(4)};
  double worst = 0.0;
  for (const auto& sys : systems) {
    const double box = sys.label.find("veselova") != std::string::npos ? 0.5 : 2.0;
    for (const auto& x : sample_states(SampleGrid::uniform(sys.shape_dim, -box, box, 3), 100, 7))
      worst = std::max(worst, std::abs(liouville_residual(sys, x)));
  }
  add(out, worst <= 1e-5, "max residual over 6 systems = " + fmt("%.2e", worst) + " <= 1e-5");
  return out;
}

Outcome conformal_closedness() {
  Outcome out;
  struct Case {
    SystemDefinition sys;
    ScalarMap phi;
    double box;
  };
  const Case good[] = {{make_nonholonomic_particle({0.0}), particle_phi(), 2.0},
                       {make_vertical_disk({}), [](const Vec&) { return 0.0; }, 2.0},
                       {veselova(3), *veselova(3).known_phi, 0.5},
                       {veselova(4), *veselova(4).known_phi, 0.5}};
  double worst = 0.0;
  for (const auto& c : good) {
    const PhiFunction phi{c.phi, std::nullopt};
    for (const auto& x : sample_states(SampleGrid::uniform(c.sys.shape_dim, -c.box, c.box, 3), 100, 8))
      worst = std::max(worst, conformal_closedness_residual(c.sys, phi, x).cwiseAbs().maxCoeff());
  }
  add(out, worst <= 1e-6, "phi-simple max|R| = " + fmt("%.1e", worst) + " <= 1e-6");
  const auto bad = make_nonholonomic_particle({0.5});
  const PhiFunction phi{particle_phi(), std::nullopt};
  double largest = 0.0;
  for (const auto& x : sample_states(SampleGrid::uniform(2, -2.0, 2.0, 3), 100, 9))
    largest = std::max(largest, conformal_closedness_residual(bad, phi, x).cwiseAbs().maxCoeff());
  add(out, largest >= 1e-2, "a=0.5 max|R| = " + fmt("%.3f", largest) + " >= 1e-2");
  return out;
}

// Least-squares slope of y against x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

Outcome hamiltonisation() {
  Outcome out;
  const ReducedState x0{v2(0.2, -0.1), v2(0.5, 0.3)};
  const auto ves = veselova(3, VeselovaRealization::kChart, veselova::axial_potential(1.0));
  struct Case {
    std::string tag;
    SystemDefinition sys;
    ScalarMap phi;
    ReducedState x0;
  };
  const Case cases[] = {{"veselova n=3", ves, *ves.known_phi, x0},
                        {"particle", make_nonholonomic_particle({0.0}), particle_phi(), {v2(0.0, 0.5), v2(1.0, 0.3)}}};
  for (const auto& c : cases) {
    const auto hs = hamiltonise(c.sys, PhiFunction{c.phi, std::nullopt});
    SymplecticOptions so;
    so.dtau = 1e-3;
    so.t_stop = 10.0;
    const auto traj = integrate_symplectic(hs, c.x0, 1e9, so);
    IntegrateOptions ro;
    ro.tol = 1e-11;
    const auto ref = integrate(c.sys, c.x0, 10.0, ro);
    // State at t = 10 from the symplectic run by Hermite interpolation.
    const Vec got = state_at_time(c.sys, traj, 10.0).packed();
    const double dev = (got - ref.samples.back().state.packed()).cwiseAbs().maxCoeff();
    add(out, dev <= 1e-4, c.tag + " deviation at t=10: " + fmt("%.1e", dev));
  }

  // Long run in tau.
  const auto hs = hamiltonise(ves, PhiFunction{*ves.known_phi, std::nullopt});
  SymplecticOptions so;
  so.dtau = 1e-3;
  so.sample_stride = 100;
  const auto traj = integrate_symplectic(hs, x0, 1000.0, so);
  std::vector<double> tau, dH;
  double worst = 0.0;
  for (const auto& smp : traj.samples) {
    tau.push_back(*smp.tau);
    dH.push_back(smp.H - traj.samples.front().H);
    worst = std::max(worst, std::abs(dH.back()));
  }
  const double trend = std::abs(slope(tau, dH)) * 1000.0;
  add(out, worst <= 1e-6, "tau in [0,1000] max|dH| = " + fmt("%.1e", worst));
  add(out, trend <= 1e-7, "fitted secular change " + fmt("%.1e", trend) + " <= 1e-7");

  // Naive rk4 on the physical field over the same physical time span, for contrast.
  IntegrateOptions naive;
  naive.method = Method::kRk4;
  naive.dt = 0.05;
  naive.sample_stride = 100;
  const auto plain = integrate(ves, x0, traj.samples.back().t, naive);
  std::vector<double> t, e;
  for (const auto& smp : plain.samples) {
    t.push_back(smp.t);
    e.push_back(smp.H - plain.samples.front().H);
  }
  out.detail += "; rk4 dt=0.05 drift " + fmt("%.1e", slope(t, e) * plain.samples.back().t) + " (info)";
  return out;
}

Outcome energy_conservation() {
  Outcome out;
  const SystemDefinition systems[] = {make_nonholonomic_particle({0.0}),
                                      make_nonholonomic_particle({0.5, ParticlePotential::kUa, {}}),
                                      make_vertical_disk({}),
                                      veselova(3, VeselovaRealization::kChart, veselova::axial_potential(1.0)),
                                      veselova(4, VeselovaRealization::kChart, veselova::axial_potential(1.0))};
  IntegrateOptions opts;
  opts.tol = 1e-10;
  double worst = 0.0;
  for (const auto& sys : systems) {
    const Index r = sys.shape_dim;
    const ReducedState x0{Vec::LinSpaced(r, 0.2, -0.1), Vec::LinSpaced(r, 0.5, 0.3)};
    const auto traj = integrate(sys, x0, 100.0, opts);
    const double H0 = traj.samples.front().H;
    double err = 0.0;
    for (const auto& smp : traj.samples) err = std::max(err, std::abs(smp.H - H0));
    worst = std::max(worst, err / std::max(1.0, std::abs(H0)));
  }
  add(out, worst <= 1e-8, "max relative |H - H0| over 5 systems = " + fmt("%.1e", worst) + " <= 1e-8");
  return out;
}

Outcome r2_equivalence() {
  Outcome out;
  const auto grid = SampleGrid::uniform(2, -1.0, 1.0, 21);
  int agree = 0, exact_count = 0;
  for (int k = 0; k <= 9; ++k) {
    const auto sys = make_nonholonomic_particle({0.1 * k});
    const bool exact = check_exactness_theta(sys, grid).is_exact;
    const bool simple = detect_phi_simple(sys, grid).is_phi_simple;
    agree += exact == simple;
    exact_count += exact;
  }
  add(out, agree == 10, std::to_string(agree) + "/10 sweep points agree");
  add(out, exact_count == 1, std::to_string(exact_count) + " exact verdict(s), expected 1 (a=0)");
  return out;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "disk gyroscopic tensor vanishes", 1.0, disk_nullity},
      {2, "particle gyroscopic closed form", 1.0, particle_gyro},
      {3, "particle measure dichotomy", 10.0, particle_dichotomy},
      {4, "particle non-basic invariant measure", 1.0, non_basic_measure},
      {5, "Veselova group pipeline vs closed forms", 30.0, veselova_oracles},
      {6, "phi-simplicity recovery", 30.0, phi_recovery},
      {7, "Liouville identity", 5.0, liouville_identity},
      {8, "conformal closedness", 1.0, conformal_closedness},
      {9, "Hamiltonisation equivalence", 60.0, hamiltonisation},
      {10, "energy conservation", 10.0, energy_conservation},
      {11, "r=2 equivalence sweep", 30.0, r2_equivalence},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_budget = secs < c.budget_s;
    const bool pass = out.ok && in_budget;
    failures += !pass;
    std::printf("%s criterion %2d: %s | %s | %.2fs (budget %.0fs%s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), secs, c.budget_s, in_budget ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
