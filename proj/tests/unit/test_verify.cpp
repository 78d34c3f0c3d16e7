#include "generators.hpp"
#include "prodgeom/verify.hpp"

#include <gtest/gtest.h>

using namespace prodgeom;

namespace {

PointTensors random_tensors(testgen::Gen& gen) {
  PointTensors t;
  t.C = gen.uniform(-0.95, 0.95);
  t.A = gen.symmetric();
  t.T = Vec3(1.0, -1.0, -t.C).asDiagonal();
  t.X = Vec3(0.0, 0.0, std::sqrt(1.0 - t.C * t.C));
  return t;
}

// Gauss equation written out with ambient vectors: K = Kbar(U,Y) + h(U,U)h(Y,Y) - h(U,Y)^2.
double oracle_sectional(const FrameData& f, const AmbientTangent& u, const AmbientTangent& y) {
  const Vec3 cu(metric_g(u, f.E[0]), metric_g(u, f.E[1]), metric_g(u, f.E[2]));
  const Vec3 cy(metric_g(y, f.E[0]), metric_g(y, f.E[1]), metric_g(y, f.E[2]));
  const Mat3& h = f.b_matrix;
  return ambient_sectional(u, y) + cu.dot(h * cu) * cy.dot(h * cy) - std::pow(cu.dot(h * cy), 2);
}

}  // namespace

TEST(Verify, GaussTensorSymmetries) {
  testgen::Gen gen(31);
  for (int k = 0; k < 100; ++k) {
    const PointTensors t = random_tensors(gen);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) {
            const double r = gauss_R(t, a, b, c, d);
            EXPECT_NEAR(r, -gauss_R(t, b, a, c, d), 1e-12);
            EXPECT_NEAR(r, gauss_R(t, c, d, a, b), 1e-12);
            // First Bianchi identity
            EXPECT_NEAR(r + gauss_R(t, b, c, a, d) + gauss_R(t, c, a, b, d), 0.0, 1e-12);
          }
  }
}

TEST(Verify, SectionalCurvatureMatchesAmbientGaussOracle) {
  std::mt19937_64 rng(32);
  testgen::Gen gen(33);
  for (const Immersion& im : {family_hatMab(), family_Mt(0.4),
                              family_prop61(0.3, CurveOnSphere::latitude(1.2), CurveOnSphere::latitude(1.4))}) {
    for (int k = 0; k < 10; ++k) {
      const FrameData f = build_frame(im, im.box().sample(rng, 0.1));
      // Random orthonormal tangent pair built from the frame.
      Vec3 a = gen.gaussian3().normalized(), b = gen.gaussian3();
      b = (b - b.dot(a) * a).normalized();
      auto amb = [&](const Vec3& c) { return c[0] * f.E[0] + c[1] * f.E[1] + c[2] * f.E[2]; };
      const AmbientTangent u = amb(a), y = amb(b);
      EXPECT_NEAR(sectional_curvature(f, u, y), oracle_sectional(f, u, y), 1e-9);
    }
  }
}

TEST(Verify, SectionalCurvatureRejectsBadInput) {
  PointTensors t;
  EXPECT_THROW(sectional_curvature(t, Vec3(1, 0, 0), Vec3(1, 1, 0).normalized()), UsageError);
  EXPECT_THROW(sectional_curvature(t, Vec3(2, 0, 0), Vec3(0, 1, 0)), UsageError);
  const Immersion im = family_Mab();
  const FrameData f = build_frame(im, im.box().center() + Vec3(0.1, 0.2, 0.3));
  EXPECT_THROW(sectional_curvature(f, f.N, f.E[0]), UsageError);
}

TEST(Verify, RicciFormsAgree) {
  testgen::Gen gen(34);
  for (int k = 0; k < 200; ++k) {
    const PointTensors t = random_tensors(gen);
    const RicciResult r = ricci_scalar(t);
    EXPECT_NEAR((r.ricci - ricci_contracted(t)).cwiseAbs().maxCoeff(), 0.0, 1e-11);
    EXPECT_NEAR(r.scalar_trace, r.scalar_formula, 1e-10);
  }
  std::mt19937_64 rng(35);
  const Immersion im = family_prop61(-0.2, CurveOnSphere::latitude(1.0), CurveOnSphere::latitude(1.3));
  for (int k = 0; k < 10; ++k) {
    const FrameData f = build_frame(im, im.box().sample(rng, 0.1));
    ASSERT_TRUE(f.has_E);
    EXPECT_NEAR((ricci_scalar(f).ricci - ricci_scalar(f.tensors()).ricci).cwiseAbs().maxCoeff(), 0.0, 1e-9);
  }
}

TEST(Verify, TsinghuaEqualityIsAlgebraic) {
  testgen::Gen gen(36);
  for (int k = 0; k < 200; ++k) {
    const TsinghuaResult r = tsinghua_identity(random_tensors(gen));
    EXPECT_LT(r.equality_residual, 1e-11);
  }
}

TEST(Verify, TsinghuaRightSideIsNotAlgebraicallyZero) {
  // The right side depends on A: for generic symmetric A with C = 0 it does not vanish,
  // while on M_t it does.
  testgen::Gen gen(37);
  PointTensors t = random_tensors(gen);
  t.C = 0.0;
  t.T = Vec3(1.0, -1.0, 0.0).asDiagonal();
  t.X = Vec3::UnitZ();
  EXPECT_GT(tsinghua_identity(t).rhs_magnitude, 1e-3);
  std::mt19937_64 rng(38);
  const Immersion mt = family_Mt(0.3);
  for (int k = 0; k < 10; ++k) {
    const FrameData f = build_frame(mt, mt.box().sample(rng, 0.1));
    EXPECT_LT(tsinghua_identity(f.tensors()).rhs_magnitude, 1e-6);
  }
}

TEST(Verify, CodazziResidualConvergesWithStep) {
  const Immersion im = family_hatMab();
  VerifyParams p;
  p.n_samples = 8;
  p.seed = 4;
  const double coarse = codazzi_residual(im.with_fd_step(2e-4), p).max_residual;
  const double fine = codazzi_residual(im.with_fd_step(1e-4), p).max_residual;
  EXPECT_GT(coarse / fine, 3.0);
  EXPECT_LT(coarse / fine, 5.0);
}

TEST(Verify, SuitesPassOnBuiltInFamilies) {
  VerifyParams p;
  p.n_samples = 10;
  for (const Immersion& im : {family_Mab(), family_hatMab(), family_Mt(0.3), family_Mt(0.0),
                              family_prop61(0.3, CurveOnSphere::latitude(1.2), CurveOnSphere::latitude(1.4))}) {
    for (const CheckReport& r : verify_suite(im, p)) {
      EXPECT_TRUE(r.pass) << im.name() << " " << r.name << " " << r.max_residual << " tol " << r.tolerance;
    }
  }
}

TEST(Verify, WrongExpectationFails) {
  // M_{a,b} is not of constant sectional curvature.
  VerifyParams p;
  p.n_samples = 10;
  ProbeExpectations e;
  e.kappa = 0.5;
  bool any_fail = false;
  for (const CheckReport& r : classification_probe(family_Mab(), p, e)) any_fail |= !r.pass;
  EXPECT_TRUE(any_fail);
}

TEST(Verify, NaNNeverPasses) {
  CheckReport r;
  r.max_residual = std::numeric_limits<double>::quiet_NaN();
  r.tolerance = kInformational;
  r.finalize();
  EXPECT_FALSE(r.pass);
}

TEST(Verify, DeterministicForFixedSeed) {
  VerifyParams p;
  p.n_samples = 6;
  p.seed = 99;
  const auto a = verify_suite(family_hatMab(), p), b = verify_suite(family_hatMab(), p);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].max_residual, b[i].max_residual) << a[i].name;
}
