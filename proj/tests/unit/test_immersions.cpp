#include "generators.hpp"
#include "prodgeom/frames.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

using namespace prodgeom;

namespace {

// Hand-differentiated chart of the canonical M_{a,b}.
struct MabOracle {
  std::array<Vec6, 3> d1;
  std::array<Vec6, 6> d2;
};

MabOracle mab_oracle(const Vec3& s) {
  const double c = std::cos(s[0] * kInvSqrt2), sn = std::sin(s[0] * kInvSqrt2);
  const Vec3 z = Vec3::UnitZ();
  const Vec3 u2(std::cos(s[1]), std::sin(s[1]), 0.0), u2p(-std::sin(s[1]), std::cos(s[1]), 0.0);
  const Vec3 u3(std::cos(s[2]), std::sin(s[2]), 0.0), u3p(-std::sin(s[2]), std::cos(s[2]), 0.0);
  const Vec3 zero = Vec3::Zero();
  MabOracle o;
  o.d1[0] = raw::stack((-sn * u2 + c * z) * kInvSqrt2, (-sn * u3 + c * z) * kInvSqrt2);
  o.d1[1] = raw::stack(c * u2p, zero);
  o.d1[2] = raw::stack(zero, c * u3p);
  o.d2[0] = raw::stack(-0.5 * (c * u2 + sn * z), -0.5 * (c * u3 + sn * z));  // 11
  o.d2[1] = raw::stack(-sn * kInvSqrt2 * u2p, zero);                        // 12
  o.d2[2] = raw::stack(zero, -sn * kInvSqrt2 * u3p);                        // 13
  o.d2[3] = raw::stack(-c * u2, zero);                                      // 22
  o.d2[4] = raw::stack(zero, zero);                                         // 23
  o.d2[5] = raw::stack(zero, -c * u3);                                      // 33
  return o;
}

}  // namespace

TEST(Immersions, MabJetMatchesHandDerivatives) {
  const Immersion im = family_Mab();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 30; ++k) {
    const Vec3 s = im.box().sample(rng);
    const Jet2 j = jet(im, s);
    const MabOracle o = mab_oracle(s);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR((j.d1[i] - o.d1[i]).norm(), 0.0, 1e-8) << i;
    for (int i = 0; i < 6; ++i) EXPECT_NEAR((j.d2[i] - o.d2[i]).norm(), 0.0, 1e-6) << i;
  }
}

TEST(Immersions, JetErrorIsSecondOrder) {
  const Immersion im = family_Mab();
  const Vec3 s(0.3, 0.7, -1.1);
  const MabOracle o = mab_oracle(s);
  auto err = [&](double h) {
    const Jet2 j = jet(im.with_fd_step(h), s);
    return (j.d2[0] - o.d2[0]).norm() + (j.d1[0] - o.d1[0]).norm();
  };
  const double ratio = err(2e-3) / err(1e-3);
  EXPECT_GT(ratio, 3.5);
  EXPECT_LT(ratio, 4.5);
}

TEST(Immersions, DefiningEquationsHold) {
  std::mt19937_64 rng(12);
  const Vec3 a = Vec3(1, 2, 2).normalized(), b = Vec3(-2, 0, 1).normalized();
  const Immersion mab = family_Mab(a, b), hat = family_hatMab(a, b);
  for (double t : {0.0, 0.3, -0.5}) {
    const Immersion mt = family_Mt(t);
    for (int k = 0; k < 50; ++k) {
      const AmbientPoint x = mt(mt.box().sample(rng));
      EXPECT_NEAR(x.p.dot(x.q), t, 1e-14);
    }
  }
  for (int k = 0; k < 50; ++k) {
    const AmbientPoint x = mab(mab.box().sample(rng));
    EXPECT_NEAR(x.p.dot(a) + x.q.dot(b), 0.0, 1e-14);
    const AmbientPoint y = hat(hat.box().sample(rng));
    EXPECT_NEAR(std::pow(y.p.dot(a), 2) + std::pow(y.q.dot(b), 2), 1.0, 1e-14);
  }
}

TEST(Immersions, BoxMarginIsEnforced) {
  const Immersion im = family_Mab();
  Vec3 s = im.box().center();
  s[0] = im.box().hi[0] - 0.5 * im.fd_step();
  EXPECT_THROW(jet(im, s), DomainError);
}

TEST(Immersions, SingularChartIsReported) {
  // theta = 0 collapses the M_t chart; with a box around it the Gram determinant vanishes.
  Immersion im = family_Mt(0.2).with_box(ParamBox{Vec3(-0.5, -1, -1), Vec3(0.5, 1, 1)});
  EXPECT_THROW(build_frame(im, Vec3(0.0, 0.2, 0.3)), SingularChartError);
}

TEST(Immersions, LatitudeCurve) {
  const double theta0 = 1.1;
  const CurveOnSphere c = CurveOnSphere::latitude(theta0);
  EXPECT_NEAR(c.length(), 2 * kPi * std::sin(theta0), 1e-12);
  for (double r : {0.1, 1.0, 3.0}) {
    const auto s = c.at(r);
    EXPECT_NEAR(s.position.norm(), 1.0, 1e-14);
    EXPECT_NEAR(s.tangent.norm(), 1.0, 1e-12);
    EXPECT_NEAR((s.normal - s.position.cross(s.tangent)).norm(), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(c.curvature(r)), std::cos(theta0) / std::sin(theta0), 1e-9);
  }
}

TEST(Immersions, ReparametrizationMatchesLatitude) {
  // A latitude circle given with a non-uniform parameter.
  const double theta0 = 0.9;
  auto f = [&](double u) {
    const double phi = u + 0.3 * std::sin(u);
    return Vec3(std::sin(theta0) * std::cos(phi), std::sin(theta0) * std::sin(phi), std::cos(theta0));
  };
  auto df = [&](double u) {
    const double phi = u + 0.3 * std::sin(u), dphi = 1 + 0.3 * std::cos(u);
    return Vec3(-std::sin(theta0) * std::sin(phi) * dphi, std::sin(theta0) * std::cos(phi) * dphi, 0.0);
  };
  const CurveOnSphere c = CurveOnSphere::from_function(f, df, 0.0, 2.0);
  const double expected = std::sin(theta0) * (2.0 + 0.3 * std::sin(2.0));
  EXPECT_NEAR(c.length(), expected, 1e-10);
  // Unit speed: consecutive samples are arc-length apart.
  const double h = 1e-4;
  for (double r : {0.2, 0.8, 1.3}) {
    EXPECT_NEAR((c.at(r + h).position - c.at(r - h).position).norm() / (2 * h), 1.0, 1e-6);
  }
}

TEST(Immersions, SampledCurveFromCsv) {
  const std::string path = testing::TempDir() + "curve.csv";
  {
    std::ofstream f(path);
    f << "s,x,y,z\n";
    for (int i = 0; i <= 200; ++i) {
      const double s = 2.0 * i / 200;
      f << s << "," << std::cos(s) << "," << std::sin(s) << "," << 0.0 << "\n";
    }
  }
  const CurveOnSphere c = CurveOnSphere::from_csv(path);
  EXPECT_NEAR(c.length(), 2.0, 1e-6);
  EXPECT_NEAR(c.curvature(1.0), 0.0, 1e-4);  // great circle
  std::remove(path.c_str());
}

TEST(Immersions, OrientationIsContinuousOverTheBox) {
  // Property: the oriented normal never flips between nearby samples.
  std::mt19937_64 rng(13);
  for (const Immersion& im : {family_Mab(), family_hatMab(), family_Mt(0.3)}) {
    for (int k = 0; k < 30; ++k) {
      const Vec3 s = im.box().sample(rng, 0.15);
      const Vec3 ds = Vec3(1e-3, -2e-3, 1.5e-3);
      const Vec6 n0 = build_frame(im, s).N.stacked();
      const Vec6 n1 = build_frame(im, s + ds).N.stacked();
      EXPECT_GT(n0.dot(n1), 0.99);
    }
  }
}

TEST(Immersions, Prop61RejectsDegenerateC) {
  const CurveOnSphere g = CurveOnSphere::latitude(1.2);
  EXPECT_THROW(family_prop61(1.0, g, g), DomainError);
  EXPECT_THROW(family_Mt(1.0), DomainError);
}
