#include <gtest/gtest.h>

#include <random>

#include "chaplygin/geometry.hpp"
#include "chaplygin/systems.hpp"
#include "oracles.hpp"

namespace {

using namespace chaplygin;

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

SystemDefinition veselova(const Vec& A, VeselovaRealization realization) {
  VeselovaParams p;
  p.n = A.size();
  p.A = A;
  p.realization = realization;
  return make_veselova(p);
}

TEST(ReducedMetric, Disk) {
  const auto sys = make_vertical_disk({2.0, 0.5, 0.7, 1.3});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int trial = 0; trial < 20; ++trial) {
    const ReducedMetric g = reduced_metric(sys, v2(u(rng), u(rng)));
    EXPECT_LE((g.K - Mat(oracle::disk_K(2.0, 0.5, 0.7, 1.3))).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE((g.K * g.K_inv - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(ReducedMetric, ParticleAndVeselovaPole) {
  const auto particle = make_nonholonomic_particle({0.0});
  EXPECT_LE((reduced_metric(particle, v2(0.4, 0.0)).K - Mat::Identity(2, 2)).cwiseAbs().maxCoeff(),
            0.0);
  for (auto realization : {VeselovaRealization::kChart, VeselovaRealization::kGroup}) {
    const auto sys = veselova(v3(1, 2, 3), realization);
    Mat expect = Vec(v2(3.0, 6.0)).asDiagonal();
    EXPECT_LE((reduced_metric(sys, v2(0, 0)).K - expect).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gyro, DiskVanishes) {
  const auto sys = make_vertical_disk({1.0, 1.0, 1.0, 1.0});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-M_PI, M_PI);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec s = v2(u(rng), u(rng));
    EXPECT_LE(gyroscopic_coefficients(sys, s).max_abs(), 1e-7);
    EXPECT_LE(theta(sys, s).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_LE(gyro_two_form(sys, {s, v2(1.0, -2.0)}).cwiseAbs().maxCoeff(), 1e-7);
  }
}

TEST(Gyro, ParticleClosedForm) {
  for (double a : {0.0, 0.3, 0.5, 0.7}) {
    const auto sys = make_nonholonomic_particle({a});
    for (double y : {-1.5, 0.0, 1.0, 2.0}) {
      const Vec s = v2(0.3, y);
      const auto C = gyroscopic_coefficients(sys, s);
      const Eigen::Vector2d expect = oracle::particle_C12(a, y);
      EXPECT_NEAR(C(0, 1, 0), expect(0), 1e-7);
      EXPECT_NEAR(C(0, 1, 1), expect(1), 1e-7);
      EXPECT_EQ(C(1, 0, 0), -C(0, 1, 0));
      EXPECT_EQ(C(0, 0, 1), 0.0);
      const Vec th = theta(sys, s);
      EXPECT_NEAR(th(0), oracle::particle_theta(a, y)(0), 1e-7);
      EXPECT_NEAR(th(1), oracle::particle_theta(a, y)(1), 1e-7);
    }
  }
  const auto C = gyroscopic_coefficients(make_nonholonomic_particle({0.0}), v2(0.0, 1.0));
  EXPECT_NEAR(C(0, 1, 0), -0.5, 1e-7);
  EXPECT_NEAR(C(0, 1, 1), 0.0, 1e-7);
  const Vec th = theta(make_nonholonomic_particle({0.5}), v2(0.0, 1.0));
  EXPECT_NEAR(th(0), 2.0 / 7.0, 1e-7);
  EXPECT_NEAR(th(1), -3.0 / 7.0, 1e-7);
}

TEST(Gyro, ParticleTwoForm) {
  for (double a : {0.0, 0.4}) {
    const auto sys = make_nonholonomic_particle({a});
    const double y = 0.8, px = 1.2, py = -0.4;
    const Mat W = gyro_two_form(sys, {v2(0.0, y), v2(px, py)});
    const double expect = -((1 - a * a) * y * px + a * py) / (1 + (1 - a * a) * y * y);
    EXPECT_NEAR(W(0, 1), expect, 1e-7);
    EXPECT_EQ(W(1, 0), -W(0, 1));
    EXPECT_EQ(W(0, 0), 0.0);
    EXPECT_LE(gyro_two_form(sys, {v2(0.0, y), v2(0.0, 0.0)}).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Gyro, ProjectorRouteAgrees) {
  for (double a : {0.0, 0.6}) {
    const auto sys = make_nonholonomic_particle({a});
    for (double y : {-1.0, 0.5, 1.7}) {
      const auto C = gyroscopic_coefficients(sys, v2(0.2, y));
      const auto P = gyroscopic_coefficients_projector(sys, v2(0.2, y));
      for (Index k = 0; k < 2; ++k) EXPECT_NEAR(C(0, 1, k), P(0, 1, k), 1e-8);
    }
  }
}

TEST(Gyro, TensorialUnderRescaling) {
  // New chart u = (2x, y): hor d/du^1 = 1/2 hor d/dx.
  const double a = 0.35;
  const auto base = make_nonholonomic_particle({a});
  SystemDefinition scaled = base;
  auto& model = std::get<EuclideanModel>(scaled.model);
  const auto f0 = model.frame[0];
  const auto section = model.section;
  model.frame[0] = [f0](const Vec& q) { return Vec(0.5 * f0(q)); };
  model.section = [section](const Vec& u) { return section(v2(0.5 * u(0), u(1))); };

  const Mat J = Vec(v2(0.5, 1.0)).asDiagonal();     // ds/du
  const Mat Jinv = Vec(v2(2.0, 1.0)).asDiagonal();  // du/ds
  for (double y : {-0.8, 0.3, 1.4}) {
    const Vec s = v2(0.6, y);
    const Vec u = v2(2.0 * s(0), y);
    const auto C = gyroscopic_coefficients(base, s);
    const auto Cu = gyroscopic_coefficients(scaled, u);
    for (Index i = 0; i < 2; ++i)
      for (Index j = 0; j < 2; ++j)
        for (Index k = 0; k < 2; ++k) {
          double expect = 0.0;
          for (Index p = 0; p < 2; ++p)
            for (Index q = 0; q < 2; ++q)
              for (Index c = 0; c < 2; ++c) expect += J(p, i) * J(q, j) * Jinv(k, c) * C(p, q, c);
          EXPECT_NEAR(Cu(i, j, k), expect, 1e-8);
        }
  }
}

TEST(Gyro, ThetaIsRMinusOneTimesDphi) {
  const Vec A = (Vec(4) << 1.0, 2.0, 3.0, 4.0).finished();
  const auto sys = veselova(A, VeselovaRealization::kChart);
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec s = oracle::hemisphere_point(rng, 3, 0.3);
    const Vec dphi = numkit::fd_gradient(
        [&A](const Vec& x) { return oracle::veselova_phi(A, oracle::gamma(x)); }, s);
    EXPECT_LE((theta(sys, s) - 2.0 * dphi).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(Gyro, VeselovaExample) {
  const Vec s = v2(0.6, 0.0);
  for (auto realization : {VeselovaRealization::kChart, VeselovaRealization::kGroup}) {
    const auto C = gyroscopic_coefficients(veselova(v3(1, 2, 3), realization), s);
    EXPECT_NEAR(C(0, 1, 1), 0.6 * (1.0 - 3.0) / 2.28, 1e-6);
    EXPECT_NEAR(C(0, 1, 0), 0.0, 1e-6);
  }
}

TEST(Gyro, VeselovaRealizationsAgree) {
  for (Index n : {3, 4}) {
    const Vec A = Vec::LinSpaced(n, 1.0, static_cast<double>(n));
    const auto chart = veselova(A, VeselovaRealization::kChart);
    const auto group = veselova(A, VeselovaRealization::kGroup);
    std::mt19937_64 rng(100 + n);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec s = oracle::hemisphere_point(rng, n - 1, 0.3);
      const Vec g = oracle::gamma(s);
      const auto Cc = gyroscopic_coefficients(chart, s);
      const auto Cg = gyroscopic_coefficients(group, s);
      const Mat Kg = reduced_metric(group, s).K;
      EXPECT_LE((Kg - oracle::veselova_K(A, g)).cwiseAbs().maxCoeff(), 1e-6);
      for (int i = 0; i < n - 1; ++i)
        for (int j = 0; j < n - 1; ++j)
          for (int k = 0; k < n - 1; ++k) {
            EXPECT_NEAR(Cg(i, j, k), Cc(i, j, k), 1e-5);
            EXPECT_NEAR(Cc(i, j, k), oracle::veselova_C(A, g, i, j, k), 1e-12);
          }
    }
  }
}

TEST(Gyro, SectionIndependence) {
  const Vec A = (Vec(4) << 1.0, 1.5, 3.0, 4.5).finished();
  const auto sys = veselova(A, VeselovaRealization::kGroup);
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec s = oracle::hemisphere_point(rng, 3, 0.3);
    const Mat g = veselova::section(oracle::gamma(s));
    // h fixes e_n, so g' = h g has the same gamma = g'^{-1} e_n.
    Mat B = Mat::NullaryExpr(3, 3, [&] { return normal(rng); });
    Mat h = Mat::Identity(4, 4);
    h.topLeftCorner(3, 3) = numkit::expm(B - B.transpose());
    const Mat g2 = h * g;
    const auto C1 = gyroscopic_coefficients_at(sys, s, ConfigPoint{g});
    const auto C2 = gyroscopic_coefficients_at(sys, s, ConfigPoint{g2});
    const auto C3 = gyroscopic_coefficients_at(sys, s, ConfigPoint{oracle::rotation_with_last_row(rng, oracle::gamma(s))});
    for (Index i = 0; i < 3; ++i)
      for (Index j = 0; j < 3; ++j)
        for (Index k = 0; k < 3; ++k) {
          EXPECT_NEAR(C1(i, j, k), C2(i, j, k), 1e-6);
          EXPECT_NEAR(C1(i, j, k), C3(i, j, k), 1e-6);
        }
  }
}

TEST(Gyro, DegenerateFrame) {
  SystemDefinition sys = make_nonholonomic_particle({0.0});
  auto& model = std::get<EuclideanModel>(sys.model);
  model.frame[1] = model.frame[0];
  EXPECT_THROW(reduced_metric(sys, v2(0.0, 0.5)), DegenerateFrame);
  EXPECT_THROW(gyroscopic_coefficients(sys, v2(0.0, 0.5)), DegenerateFrame);
}

TEST(Gyro, FrameFromConstraints) {
  // zdot = y xdot, shape coordinates (x, y) inside (x, y, z).
  auto constraints = [](const Vec& q) {
    Mat c(1, 3);
    c << -q(1), 0.0, 1.0;
    return c;
  };
  const auto frame = horizontal_frame_from_constraints(constraints, {0, 1}, 3);
  ASSERT_EQ(frame.size(), 2u);
  const Vec q = v3(0.3, 1.7, -2.0);
  EXPECT_LE((frame[0](q) - v3(1.0, 0.0, 1.7)).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LE((frame[1](q) - v3(0.0, 1.0, 0.0)).cwiseAbs().maxCoeff(), 1e-14);

  SystemDefinition sys = make_nonholonomic_particle({0.0});
  std::get<EuclideanModel>(sys.model).frame = frame;
  const auto C = gyroscopic_coefficients(sys, v2(0.0, 1.0));
  EXPECT_NEAR(C(0, 1, 0), -0.5, 1e-7);
}

}  // namespace
