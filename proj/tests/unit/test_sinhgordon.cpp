#include "generators.hpp"
#include "prodgeom/sinhgordon.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cstdio>
#include <fstream>

using namespace prodgeom;

namespace {

double conformal_a(double h, double t) {
  return 0.5 * (std::cos(std::sqrt(2.0) * t) + std::cosh(std::sqrt(2.0) * h));
}

GridSolution quadratic_grid(int n, const std::function<double(double, double)>& f) {
  GridSolution gs;
  gs.nu = gs.nv = n;
  gs.du = gs.dv = 1.0 / (n - 1);
  gs.h.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gs.at(i, j) = f(gs.u(i), gs.v(j));
  return gs;
}

const GridSolution& soliton64() {
  static const GridSolution gs = solve_sinh_gordon(Domain{}, 64, 64, soliton_boundary(), nullptr, {}, "soliton");
  return gs;
}

}  // namespace

TEST(SinhGordon, ZeroBoundaryRecoversZeroFromNonzeroStart) {
  std::vector<double> init(32 * 32, 0.4);
  const GridSolution gs = solve_sinh_gordon(Domain{}, 32, 32, zero_boundary(), &init);
  EXPECT_LE(gs.residual, 1e-10);
  double m = 0.0;
  for (double x : gs.h) m = std::max(m, std::abs(x));
  EXPECT_LT(m, 1e-10);
}

TEST(SinhGordon, SolitonProfileConservesEnergy) {
  // 1/2 H'^2 + 1/2 cosh(sqrt2 H) is a first integral of H'' = -(1/sqrt2) sinh(sqrt2 H).
  const double e0 = 0.5 * std::cosh(std::sqrt(2.0) * 0.5);
  const double d = 1e-5;
  for (double u : {0.1, 0.4, 0.8, 1.0}) {
    const double hp = (soliton_profile(u + d) - soliton_profile(u - d)) / (2 * d);
    const double e = 0.5 * hp * hp + 0.5 * std::cosh(std::sqrt(2.0) * soliton_profile(u));
    EXPECT_NEAR(e, e0, 1e-8) << u;
  }
  EXPECT_NEAR(soliton_profile(0.0), 0.5, 1e-15);
  EXPECT_NEAR(soliton_profile(0.3), soliton_profile(-0.3), 1e-12);
}

TEST(SinhGordon, SolitonSolveIsIndependentOfV) {
  const GridSolution& gs = soliton64();
  EXPECT_LE(gs.residual, 1e-10);
  double err = 0.0;
  for (int i = 0; i < gs.nu; ++i) {
    const double H = soliton_profile(gs.u(i));
    for (int j = 0; j < gs.nv; ++j) err = std::max(err, std::abs(gs.at(i, j) - H));
  }
  EXPECT_LT(err, 1e-5);  // O(du^2)
}

TEST(SinhGordon, MetricDeterminantIsConformalFactorSquared) {
  testgen::Gen gen(41);
  for (int k = 0; k < 500; ++k) {
    const double h = gen.uniform(-1.5, 1.5), hu = gen.uniform(-2, 2), hv = gen.uniform(-2, 2);
    const double t = gen.uniform(-1.5, 1.5);
    const IntrinsicData d = intrinsic_data(h, hu, hv, t);
    const double a = conformal_a(h, t);
    EXPECT_NEAR(d.g3.determinant() / (a * a), 1.0, 1e-11);
    EXPECT_NEAR((d.g3 - d.g3.transpose()).norm(), 0.0, 1e-14);
  }
}

TEST(SinhGordon, ShapeOperatorSpectrum) {
  // Minimal with b3 = b5 = b6 = 0: eigenvalues +-sqrt(b1^2 + b2^2) and 0.
  testgen::Gen gen(42);
  for (int k = 0; k < 300; ++k) {
    const double h = gen.uniform(-1.5, 1.5), t = gen.uniform(-1.5, 1.5);
    const IntrinsicData d = intrinsic_data(h, gen.uniform(-1, 1), gen.uniform(-1, 1), t);
    const BFields b = b_fields(h, t);
    const double lam = std::hypot(b.b1, b.b2);
    Eigen::EigenSolver<Mat3> es(d.A3);
    std::vector<double> ev;
    for (int i = 0; i < 3; ++i) {
      EXPECT_NEAR(es.eigenvalues()[i].imag(), 0.0, 1e-9);
      ev.push_back(es.eigenvalues()[i].real());
    }
    std::sort(ev.begin(), ev.end());
    EXPECT_NEAR(ev[0], -lam, 1e-9);
    EXPECT_NEAR(ev[1], 0.0, 1e-9);
    EXPECT_NEAR(ev[2], lam, 1e-9);
  }
}

TEST(SinhGordon, TrivialSolutionGivesTotallyGeodesicSlices) {
  for (double t : {-1.0, 0.2, 0.9}) {
    const IntrinsicData d = intrinsic_data(0.0, 0.0, 0.0, t);
    const double b1 = kInvSqrt2 * std::tan(t * kInvSqrt2);
    EXPECT_NEAR(b_fields(0.0, t).b1, b1, 1e-14);
    EXPECT_NEAR(b_fields(0.0, t).b2, 0.0, 1e-14);
    EXPECT_NEAR(d.A3(0, 0), b1, 1e-12);
    EXPECT_NEAR(d.A3(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(d.A3(2, 0), 0.0, 1e-12);
  }
}

TEST(SinhGordon, BFieldsAtZeroTime) {
  // cos^2 = 1 turns the denominator into cosh^2(h/sqrt2).
  testgen::Gen gen(46);
  for (int k = 0; k < 100; ++k) {
    const double h = gen.uniform(-3, 3);
    const BFields b = b_fields(h, 0.0);
    EXPECT_EQ(b.b1, 0.0);
    EXPECT_NEAR(b.b2, kInvSqrt2 * std::tanh(h * kInvSqrt2), 1e-15);
    EXPECT_EQ(b.b4, -b.b1);
  }
}

TEST(SinhGordon, AdaptedCoordinateRelation) {
  testgen::Gen gen(43);
  for (int k = 0; k < 500; ++k) {
    EXPECT_LT(coordinate_relation_residual(gen.uniform(-2, 2), gen.uniform(-2, 2)), 1e-8);
  }
  for (double h : {-0.7, 0.0, 0.4, 1.3}) {
    const AdaptedFrame f = adapted_frame(h, 0.1, -0.2, 0.0);
    EXPECT_NEAR(f.a1, std::cosh(h * kInvSqrt2), 1e-12);
    EXPECT_NEAR(f.a2, 0.0, 1e-12);
  }
}

TEST(SinhGordon, AdaptedFrameIsOrthonormal) {
  testgen::Gen gen(44);
  for (int k = 0; k < 200; ++k) {
    const double h = gen.uniform(-1, 1), hu = gen.uniform(-1, 1), hv = gen.uniform(-1, 1), t = gen.uniform(-1, 1);
    const AdaptedFrame f = adapted_frame(h, hu, hv, t);
    const IntrinsicData d = intrinsic_data(h, hu, hv, t);
    EXPECT_NEAR((f.E.transpose() * d.g3 * f.E - Mat3::Identity()).norm(), 0.0, 1e-11);
  }
}

TEST(SinhGordon, ExcludedSetIsRejected) {
  // cos(t/sqrt2) = 0 at t = pi/sqrt2.
  EXPECT_THROW(b_fields(0.0, kPi / std::sqrt(2.0)), ExcludedSetError);
  EXPECT_NO_THROW(b_fields(0.1, kPi * kInvSqrt2));
}

TEST(SinhGordon, NonconvergenceCarriesTrace) {
  SolverOptions o;
  o.max_iter = 1;
  try {
    solve_sinh_gordon(Domain{}, 32, 32, soliton_boundary(), nullptr, o);
    FAIL() << "expected NonconvergenceError";
  } catch (const NonconvergenceError& e) {
    EXPECT_FALSE(e.residual_trace().empty());
    EXPECT_EQ(e.last_iterate().nu, 32);
  }
  EXPECT_THROW(solve_sinh_gordon(Domain{}, 8, 8, zero_boundary()), Error);
}

TEST(SinhGordon, InterpolationReproducesLowDegreeData) {
  // Bilinear data is reproduced exactly; node central differences are exact on quadratics,
  // whose gradients are then interpolated exactly.
  const auto bil = [](double u, double v) { return 0.3 + u - 2.0 * v + 0.7 * u * v; };
  const auto quad = [](double u, double v) { return 0.3 * u * u - 0.2 * u * v + 0.5 * v * v + u; };
  const GridSolution gb = quadratic_grid(21, bil), gq = quadratic_grid(21, quad);
  testgen::Gen gen(45);
  for (int k = 0; k < 100; ++k) {
    const double u = gen.uniform(0.1, 0.9), v = gen.uniform(0.1, 0.9);
    EXPECT_NEAR(interpolate_h(gb, u, v), bil(u, v), 1e-13);
    const Eigen::Vector2d g = interpolate_gradient(gq, u, v);
    EXPECT_NEAR(g[0], 0.6 * u - 0.2 * v + 1.0, 1e-11);
    EXPECT_NEAR(g[1], -0.2 * u + v, 1e-11);
  }
  EXPECT_THROW(interpolate_gradient(gq, 0.01, 0.5), DomainError);
}

TEST(SinhGordon, ChecksPassOnSolitonSolve) {
  for (const CheckReport& r : intrinsic_checks(soliton64(), 20, 3)) {
    EXPECT_TRUE(r.pass) << r.name << " " << r.max_residual;
  }
  EXPECT_TRUE(coordinate_solution_check(soliton64(), 20, 3).pass);
}

TEST(SinhGordon, FrameSystemLocalizesCorruption) {
  GridSolution gs = soliton64();
  gs.at(30, 20) += 0.05;
  const double bad = node_residuals(gs, 30, 20, 0.3).frame_system;
  const double far = node_residuals(gs, 10, 45, 0.3).frame_system;
  EXPECT_GT(bad, 1.0);
  EXPECT_LT(far, 1e-4);
}

TEST(SinhGordon, ArchiveRoundTripIsExact) {
  const std::string stem = testing::TempDir() + "sg_roundtrip";
  GridSolution gs = soliton64();
  gs.at(5, 7) = 0.1 + 0.2;  // needs all 17 digits
  gs.at(6, 7) = 1.0 / 3.0;
  save_archive(gs, stem);
  for (const std::string& p : {stem, stem + ".json", stem + ".csv"}) {
    const GridSolution back = load_archive(p);
    ASSERT_EQ(back.nu, gs.nu);
    ASSERT_EQ(back.nv, gs.nv);
    EXPECT_EQ(back.du, gs.du);
    EXPECT_EQ(back.boundary, gs.boundary);
    EXPECT_TRUE(back.h == gs.h);
  }
  {
    std::ofstream f(stem + ".csv", std::ios::app);
    f << "garbage,line\n";
  }
  EXPECT_THROW(load_archive(stem), UsageError);
  std::remove((stem + ".csv").c_str());
  std::remove((stem + ".json").c_str());
  EXPECT_THROW(load_archive(stem), UsageError);
}
