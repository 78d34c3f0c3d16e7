#include "generators.hpp"
#include "prodgeom/parallel.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace prodgeom;

namespace {

ParallelParams random_params(testgen::Gen& gen, double r_max = 3.0) {
  ParallelParams pp;
  pp.r = gen.uniform(-r_max, r_max);
  pp.b1 = gen.uniform(-1.5, 1.5);
  pp.b2 = gen.uniform(-1.5, 1.5);
  pp.b4 = gen.uniform(-1.5, 1.5);
  return pp;
}

Mat3 source_shape(const ParallelParams& pp) {
  Mat3 a = Mat3::Zero();
  a << pp.b1, pp.b2, 0.0, pp.b2, pp.b4, 0.0, 0.0, 0.0, 0.0;
  return a;
}

}  // namespace

TEST(Parallel, DeterminantMatchesMatrix) {
  testgen::Gen gen(51);
  for (int k = 0; k < 1000; ++k) {
    const ParallelParams pp = random_params(gen);
    EXPECT_NEAR(det_B(pp), B_matrix(pp).determinant(), 1e-12);
  }
}

TEST(Parallel, ClosedFormShapeMatchesJacobiRoute) {
  testgen::Gen gen(52);
  int used = 0;
  for (int k = 0; k < 1000; ++k) {
    const ParallelParams pp = random_params(gen);
    if (std::abs(det_B(pp)) <= 0.05) continue;
    ++used;
    const Mat3 a = A_r(pp);
    EXPECT_NEAR((a - A_r_jacobi(pp)).cwiseAbs().maxCoeff(), 0.0, 1e-11);
    EXPECT_NEAR((a - a.transpose()).norm(), 0.0, 1e-14);
    EXPECT_EQ(a(2, 2), 0.0);
  }
  EXPECT_GT(used, 500);
}

TEST(Parallel, ShapeSatisfiesRiccatiEquation) {
  // Along the normal geodesic of a C = 0 hypersurface the ambient Jacobi operator
  // is diag(1/2, 1/2, 0) in the transported frame; A_r then solves A' = A^2 + R_N.
  testgen::Gen gen(53);
  const Mat3 RN = Vec3(0.5, 0.5, 0.0).asDiagonal();
  for (int k = 0; k < 200; ++k) {
    ParallelParams pp = random_params(gen);
    if (std::abs(det_B(pp)) <= 0.1) continue;
    const double h = 1e-4;
    ParallelParams p = pp, m = pp;
    p.r += h;
    m.r -= h;
    const Mat3 da = (A_r(p) - A_r(m)) / (2 * h);
    const Mat3 a = A_r(pp);
    EXPECT_NEAR((da - (a * a + RN)).cwiseAbs().maxCoeff() / (1.0 + a.squaredNorm()), 0.0, 1e-5);
  }
}

TEST(Parallel, ZeroDistanceIsTheSource) {
  testgen::Gen gen(54);
  for (int k = 0; k < 100; ++k) {
    ParallelParams pp = random_params(gen);
    pp.r = 0.0;
    EXPECT_NEAR(det_B(pp), 1.0, 1e-15);
    EXPECT_NEAR((B_matrix(pp) - Mat3::Identity()).norm(), 0.0, 1e-15);
    EXPECT_NEAR((A_r(pp) - source_shape(pp)).norm(), 0.0, 1e-14);
  }
}

TEST(Parallel, DeterminantSpecialCases) {
  testgen::Gen gen(55);
  for (int k = 0; k < 200; ++k) {
    const double r = gen.uniform(-3, 3), x = gen.uniform(-1, 1), y = gen.uniform(-1, 1);
    const double c = std::cos(std::sqrt(2.0) * r), s = std::sin(std::sqrt(2.0) * r);
    // M_0, b = diag(1/sqrt2, -1/sqrt2): a pure cosine.
    EXPECT_NEAR(det_B({r, kInvSqrt2, 0.0, -kInvSqrt2}), c, 1e-14);
    // b1 b4 - b2^2 = -1/2: det = cos - (b1 + b4) sin / sqrt2.
    if (std::abs(x) > 0.1) {
      const double b4 = -(0.5 - y * y) / x;
      EXPECT_NEAR(det_B({r, x, y, b4}), c - (x + b4) * s * kInvSqrt2, 1e-11 * (1 + std::abs(b4)));
    }
    // b1 b4 - b2^2 = 1/2: det = 1 - (b1 + b4) sin / sqrt2.
    if (std::abs(x) > 0.1) {
      const double b4 = (0.5 + y * y) / x;
      EXPECT_NEAR(det_B({r, x, y, b4}), 1.0 - (x + b4) * s * kInvSqrt2, 1e-11 * (1 + std::abs(b4)));
    }
    // Minimal source, b4 = -b1.
    const double q = x * x + y * y;
    EXPECT_NEAR(det_B({r, x, y, -x}), 0.5 * (1 - 2 * q + (1 + 2 * q) * c), 1e-13);
  }
}

TEST(Parallel, TrigSnapIsExactAtQuarterTurns) {
  for (int k = -6; k <= 6; ++k) {
    const double r = k * kMinimalDistance;
    const auto [c, s] = trig_sqrt2(r);
    EXPECT_TRUE(c == 0.0 || c == 1.0 || c == -1.0) << k;
    EXPECT_TRUE(s == 0.0 || s == 1.0 || s == -1.0) << k;
    EXPECT_NEAR(c, std::cos(std::sqrt(2.0) * r), 1e-14);
    EXPECT_NEAR(s, std::sin(std::sqrt(2.0) * r), 1e-14);
  }
  const auto [c, s] = trig_sqrt2(0.3);
  EXPECT_EQ(c, std::cos(std::sqrt(2.0) * 0.3));
  EXPECT_EQ(s, std::sin(std::sqrt(2.0) * 0.3));
}

TEST(Parallel, MeanCurvatureIsTraceOverThree) {
  testgen::Gen gen(56);
  for (int k = 0; k < 500; ++k) {
    ParallelParams pp = random_params(gen);
    if (std::abs(pp.b1) < 0.2) continue;
    pp.b4 = (0.5 + pp.b2 * pp.b2) / pp.b1;
    if (std::abs(det_B(pp)) <= 0.05) continue;
    EXPECT_NEAR(mean_curvature_r(pp), A_r(pp).trace() / 3.0, 1e-10 * (1 + std::abs(pp.b4)));
  }
  EXPECT_THROW(mean_curvature_r({0.3, 0.5, 0.0, 0.5}), ContractError);
  // Minimal at a quarter turn, exactly.
  EXPECT_EQ(mean_curvature_r({kMinimalDistance, 1.0, 0.0, 0.5}), 0.0);
  EXPECT_FALSE(std::signbit(mean_curvature_r({kMinimalDistance, -1.0, 0.0, -0.5})));
}

TEST(Parallel, RicciOfMinimalSource) {
  EXPECT_NEAR(parallel_ricci_minimal(0.0, 0.0, 0.0).first, 0.5, 1e-15);
  EXPECT_EQ(parallel_ricci_minimal(0.3, 0.2, 0.7).second, 1.0);
  // Tensor-form Ricci of A_r with C = 0 gives the same eigenvalue.
  testgen::Gen gen(57);
  for (int k = 0; k < 200; ++k) {
    const double b1 = gen.uniform(-1, 1), b2 = gen.uniform(-1, 1), r = gen.uniform(-2, 2);
    const ParallelParams pp{r, b1, b2, -b1};
    if (std::abs(det_B(pp)) <= 0.05) continue;
    PointTensors t;
    t.A = A_r(pp);
    t.T = Vec3(1.0, -1.0, 0.0).asDiagonal();
    t.X = Vec3::UnitZ();
    const Mat3 ric = ricci_scalar(t).ricci;
    const auto [l12, l3] = parallel_ricci_minimal(b1, b2, r);
    EXPECT_NEAR(ric(0, 0), l12, 1e-10);
    EXPECT_NEAR(ric(1, 1), l12, 1e-10);
    EXPECT_NEAR(ric(0, 1), 0.0, 1e-10);
    EXPECT_NEAR(ric(2, 2), l3, 1e-12);
  }
  EXPECT_THROW(parallel_ricci_minimal(0.0, 0.0, 2 * kMinimalDistance), FocalPointError);
}

TEST(Parallel, RicciOfComposedParallelMatchesFormula) {
  // Finite differences of exp(r N) on M_{a,b} against the closed-form eigenvalues.
  const Immersion src = family_Mab();
  const double r = kMinimalDistance / 2;
  const Immersion par = parallel_immersion(src, r);
  std::mt19937_64 rng(58);
  for (int k = 0; k < 8; ++k) {
    const Vec3 s = par.box().sample(rng, 0.1);
    const FrameData f0 = build_frame(src, s);
    const FrameData f = build_frame(par, s);
    Eigen::SelfAdjointEigenSolver<Mat3> es(ricci_scalar(f).ricci);
    const auto [l12, l3] = parallel_ricci_minimal(f0.b[0], f0.b[1], r);
    std::vector<double> want{l12, l12, l3};
    std::sort(want.begin(), want.end());
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(es.eigenvalues()[i], want[i], 1e-3) << k;
  }
}

TEST(Parallel, ComposedShapeMatchesClosedForm) {
  const Immersion src = family_hatMab();
  std::mt19937_64 rng(59);
  for (double r : {0.25, -0.4, 0.9}) {
    const Immersion par = parallel_immersion(src, r);
    for (int k = 0; k < 5; ++k) {
      const Vec3 s = par.box().sample(rng, 0.1);
      const FrameData f0 = build_frame(src, s);
      const ParallelParams pp{r, f0.b[0], f0.b[1], f0.b[3]};
      EXPECT_NEAR(mean_curvature(build_frame(par, s)), mean_curvature_r(pp), 1e-5) << r;
    }
  }
}

TEST(Parallel, SemigroupAndProductAngle) {
  const Immersion src = family_Mt(0.3);
  const Immersion a = parallel_immersion(parallel_immersion(src, 0.2), 0.35);
  const Immersion b = parallel_immersion(src, 0.55);
  std::mt19937_64 rng(60);
  for (int k = 0; k < 10; ++k) {
    const Vec3 s = a.box().sample(rng, 0.1);
    EXPECT_NEAR((a(s).stacked() - b(s).stacked()).norm(), 0.0, 1e-8);
    EXPECT_NEAR(build_frame(b, s).C, 0.0, 1e-7);
  }
  EXPECT_EQ(parallel_immersion(src, 0.0)(Vec3(1.0, 0.3, 0.2)).stacked(), src(Vec3(1.0, 0.3, 0.2)).stacked());
}

TEST(Parallel, MembershipOfMabParallel) {
  VerifyParams p;
  p.n_samples = 10;
  EXPECT_TRUE(membership_check(family_Mab(), kMinimalDistance, p).pass);
  EXPECT_FALSE(membership_check(family_Mab(), 0.3, p).pass);
}

TEST(Parallel, MinimalParallelOnlyAtQuarterTurn) {
  VerifyParams p;
  p.n_samples = 10;
  for (const CheckReport& r : theorem46_check(family_hatMab(), p)) EXPECT_TRUE(r.pass) << r.name;
  const auto off = theorem46_check(family_hatMab(), p, kMinimalDistance / 2);
  EXPECT_FALSE(off[0].pass);
  EXPECT_GT(off[0].max_residual, 1e-2);
  EXPECT_THROW(theorem46_check(family_Mt(0.3), p), ContractError);
}

TEST(Parallel, SweepRowsAndFocalPoints) {
  VerifyParams p;
  p.n_samples = 8;
  const Immersion im = family_hatMab();
  const auto rows = sweep(im, 0.0, 1.2, 4, p);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_TRUE(std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.r == kMinimalDistance; }));
  // r = 0 row reproduces the source mean curvature at the same samples.
  double h = 0.0, hmax = 0.0;
  const auto samples = sample_params(parallel_immersion(im, 0.0), p);
  for (const Vec3& s : samples) {
    const double v = mean_curvature(build_frame(im, s));
    h += v / samples.size();
    hmax = std::max(hmax, std::abs(v));
  }
  EXPECT_NEAR(rows[0].H_mean, h, 1e-8);
  EXPECT_NEAR(rows[0].H_max, hmax, 1e-8);
  EXPECT_NEAR(rows[0].detB_min, 1.0, 1e-15);
  EXPECT_THROW(sweep(family_Mt(0.0), 0.0, 2 * kMinimalDistance, 2, p), FocalPointError);
  EXPECT_THROW(sweep(im, 1.0, 0.0, 4, p), UsageError);
}
