#include "prodgeom/immersions.hpp"

#include "prodgeom/frames.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace prodgeom {

bool ParamBox::contains(const Vec3& s, double margin) const {
  for (int i = 0; i < 3; ++i) {
    if (!(s[i] > lo[i] + margin && s[i] < hi[i] - margin)) return false;
  }
  return true;
}

Vec3 ParamBox::sample(std::mt19937_64& rng, double shrink) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vec3 s;
  for (int i = 0; i < 3; ++i) {
    const double width = hi[i] - lo[i];
    const double a = lo[i] + shrink * width;
    const double b = hi[i] - shrink * width;
    s[i] = a + (b - a) * unit(rng);
  }
  return s;
}

Immersion::Immersion(std::string name, Map eval, ParamBox box, double fd_step)
    : name_(std::move(name)),
      eval_(std::make_shared<const Map>(std::move(eval))),
      box_(box),
      fd_step_(fd_step) {
  if (!(fd_step > 0.0)) throw UsageError("fd_step must be positive");
}

Immersion Immersion::with_fd_step(double step) const {
  if (!(step > 0.0)) throw UsageError("fd_step must be positive");
  Immersion out = *this;
  out.fd_step_ = step;
  return out;
}

Immersion Immersion::with_orientation(int sign) const {
  Immersion out = *this;
  out.orientation_ = sign < 0 ? -1 : 1;
  return out;
}

Immersion Immersion::with_box(const ParamBox& box) const {
  Immersion out = *this;
  out.box_ = box;
  return out;
}

Immersion Immersion::with_normal_hint(NormalHint hint) const {
  Immersion out = *this;
  out.hint_ = std::make_shared<const NormalHint>(std::move(hint));
  return out;
}

int Immersion::orientation_at(const Vec3& s, const Vec6& chart_n) const {
  if (!hint_) return orientation_;
  return chart_n.dot((*hint_)(s)) >= 0.0 ? orientation_ : -orientation_;
}

Immersion& Immersion::set_metadata(const std::string& key, const std::string& value) {
  metadata_[key] = value;
  return *this;
}

const Vec6& Jet2::second(int i, int j) const {
  if (i > j) std::swap(i, j);
  static constexpr int index[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  return d2[index[i][j]];
}

Mat6x3 Jet2::d1_matrix() const {
  Mat6x3 m;
  for (int i = 0; i < 3; ++i) m.col(i) = d1[i];
  return m;
}

std::array<Vec6, 3> first_partials(const Immersion& im, const Vec3& s, AmbientPoint* point) {
  const double h = im.fd_step();
  if (!im.box().contains(s, 2.0 * h)) {
    throw DomainError(fmt::format("parameter ({}, {}, {}) violates the finite-difference margin of {}",
                                  s[0], s[1], s[2], im.name()));
  }
  const AmbientPoint x = im(s);
  std::array<Vec6, 3> d1;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = h * Vec3::Unit(i);
    const Vec6 diff = (im(s + e).stacked() - im(s - e).stacked()) / (2.0 * h);
    d1[i] = raw::project_tangent(x, diff);
  }
  if (point) *point = x;
  return d1;
}

Jet2 jet(const Immersion& im, const Vec3& s) {
  Jet2 j;
  j.d1 = first_partials(im, s, &j.point);
  const double h = im.fd_step();
  const Vec6 f0 = j.point.stacked();
  int k = 0;
  for (int a = 0; a < 3; ++a) {
    for (int b = a; b < 3; ++b, ++k) {
      const Vec3 ea = h * Vec3::Unit(a);
      const Vec3 eb = h * Vec3::Unit(b);
      if (a == b) {
        j.d2[k] = (im(s + ea).stacked() - 2.0 * f0 + im(s - ea).stacked()) / (h * h);
      } else {
        j.d2[k] = (im(s + ea + eb).stacked() - im(s + ea - eb).stacked() - im(s - ea + eb).stacked() +
                   im(s - ea - eb).stacked()) /
                  (4.0 * h * h);
      }
    }
  }
  const Mat6x3 d = j.d1_matrix();
  const double gram = (d.transpose() * d).determinant();
  if (!(gram > default_tolerances().gram_min)) {
    throw SingularChartError(
        fmt::format("{}: Gram determinant {:.3e} at ({}, {}, {})", im.name(), gram, s[0], s[1], s[2]));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Curves

namespace {

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr std::array<double, 8> kGaussNodes = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                               -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                               0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                                 0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                                 0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss_legendre(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < kGaussNodes.size(); ++i) sum += kGaussWeights[i] * f(mid + half * kGaussNodes[i]);
  return half * sum;
}

// Natural cubic spline through (s_i, y_i), one component.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> s, std::vector<double> y) : s_(std::move(s)), y_(std::move(y)) {
    const std::size_t n = s_.size();
    m_.assign(n, 0.0);
    if (n < 3) return;
    std::vector<double> a(n, 0.0), b(n, 0.0), c(n, 0.0), d(n, 0.0);
    b[0] = b[n - 1] = 1.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double h0 = s_[i] - s_[i - 1];
      const double h1 = s_[i + 1] - s_[i];
      a[i] = h0 / 6.0;
      b[i] = (h0 + h1) / 3.0;
      c[i] = h1 / 6.0;
      d[i] = (y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0;
    }
    // Thomas algorithm.
    for (std::size_t i = 1; i < n; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    m_[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m_[i] = (d[i] - c[i] * m_[i + 1]) / b[i];
  }

  double value(double x) const { return eval(x, 0); }
  double derivative(double x) const { return eval(x, 1); }

 private:
  double eval(double x, int order) const {
    const auto it = std::upper_bound(s_.begin(), s_.end(), x);
    std::size_t i = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    i = std::min(i, s_.size() - 2);
    const double h = s_[i + 1] - s_[i];
    const double A = (s_[i + 1] - x) / h;
    const double B = (x - s_[i]) / h;
    if (order == 0) {
      return A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * m_[i] + (B * B * B - B) * m_[i + 1]) * h * h / 6.0;
    }
    return (y_[i + 1] - y_[i]) / h - (3.0 * A * A - 1.0) / 6.0 * h * m_[i] + (3.0 * B * B - 1.0) / 6.0 * h * m_[i + 1];
  }

  std::vector<double> s_, y_, m_;
};

}  // namespace

struct CurveOnSphere::Impl {
  // Latitude circle when theta0 > 0; otherwise a re-parametrized general curve.
  double theta0 = 0.0;

  std::function<Vec3(double)> f, df;
  double s0 = 0.0;
  std::vector<double> knots;      // s values of the quadrature table
  std::vector<double> cumulative; // arc length at each knot

  Vec3 g(double s) const { return f(s).normalized(); }
  Vec3 dg(double s) const {
    const Vec3 x = f(s);
    const double n = x.norm();
    const Vec3 u = x / n;
    const Vec3 dx = df(s);
    return (dx - u * u.dot(dx)) / n;
  }
  double speed(double s) const { return dg(s).norm(); }

  double param_at(double r) const {
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    std::size_t k = it == cumulative.begin() ? 0 : static_cast<std::size_t>(it - cumulative.begin()) - 1;
    k = std::min(k, knots.size() - 2);
    const double frac = (r - cumulative[k]) / (cumulative[k + 1] - cumulative[k]);
    double s = knots[k] + frac * (knots[k + 1] - knots[k]);
    auto sp = [this](double x) { return speed(x); };
    for (int it2 = 0; it2 < 30; ++it2) {
      const double residual = cumulative[k] + gauss_legendre(sp, knots[k], s) - r;
      const double step = residual / speed(s);
      s -= step;
      if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(s))) break;
    }
    return s;
  }
};

CurveOnSphere CurveOnSphere::latitude(double theta0) {
  if (!(theta0 > 0.0 && theta0 < kPi)) throw DomainError("latitude angle must lie in (0, pi)");
  auto impl = std::make_shared<Impl>();
  impl->theta0 = theta0;
  CurveOnSphere c;
  c.impl_ = impl;
  c.length_ = 2.0 * kPi * std::sin(theta0);
  return c;
}

CurveOnSphere CurveOnSphere::from_function(std::function<Vec3(double)> f, std::function<Vec3(double)> df,
                                           double s0, double s1) {
  if (!(s1 > s0)) throw UsageError("curve parameter interval is empty");
  auto impl = std::make_shared<Impl>();
  impl->f = std::move(f);
  impl->df = std::move(df);
  impl->s0 = s0;
  constexpr int kSegments = 2000;
  impl->knots.resize(kSegments + 1);
  impl->cumulative.resize(kSegments + 1);
  impl->cumulative[0] = 0.0;
  auto sp = [&impl](double x) { return impl->speed(x); };
  for (int k = 0; k <= kSegments; ++k) impl->knots[k] = s0 + (s1 - s0) * k / kSegments;
  for (int k = 0; k < kSegments; ++k) {
    const double piece = gauss_legendre(sp, impl->knots[k], impl->knots[k + 1]);
    if (!(piece > 0.0)) throw DomainError("curve is not regular");
    impl->cumulative[k + 1] = impl->cumulative[k] + piece;
  }
  CurveOnSphere c;
  c.length_ = impl->cumulative.back();
  c.impl_ = impl;
  return c;
}

CurveOnSphere CurveOnSphere::from_samples(const std::vector<double>& s, const std::vector<Vec3>& xyz) {
  if (s.size() != xyz.size() || s.size() < 4) throw UsageError("curve needs at least 4 samples (s, x, y, z)");
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (!(s[i] > s[i - 1])) throw UsageError("curve sample parameters must increase strictly");
  }
  std::array<std::shared_ptr<CubicSpline>, 3> comps;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> y(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) y[i] = xyz[i][c];
    comps[c] = std::make_shared<CubicSpline>(s, std::move(y));
  }
  auto f = [comps](double x) { return Vec3(comps[0]->value(x), comps[1]->value(x), comps[2]->value(x)); };
  auto df = [comps](double x) {
    return Vec3(comps[0]->derivative(x), comps[1]->derivative(x), comps[2]->derivative(x));
  };
  return from_function(f, df, s.front(), s.back());
}

CurveOnSphere CurveOnSphere::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open curve file " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> s;
  std::vector<Vec3> xyz;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, x, y, z;
    if (!(row >> a >> x >> y >> z)) throw UsageError("malformed curve row: " + line);
    s.push_back(a);
    xyz.emplace_back(x, y, z);
  }
  return from_samples(s, xyz);
}

CurveOnSphere::Sample CurveOnSphere::at(double r) const {
  const Impl& c = *impl_;
  Sample out;
  if (c.theta0 > 0.0) {
    const double st = std::sin(c.theta0);
    const double ct = std::cos(c.theta0);
    const double phi = r / st;
    out.position = Vec3(st * std::cos(phi), st * std::sin(phi), ct);
    out.tangent = Vec3(-std::sin(phi), std::cos(phi), 0.0);
  } else {
    const double s = c.param_at(r);
    out.position = c.g(s);
    out.tangent = c.dg(s).normalized();
  }
  out.normal = out.position.cross(out.tangent);
  return out;
}

double CurveOnSphere::curvature(double r) const {
  const Impl& c = *impl_;
  if (c.theta0 > 0.0) return std::cos(c.theta0) / std::sin(c.theta0);
  const double h = 1e-4 * std::max(1.0, length_);
  const Sample mid = at(r);
  const Vec3 accel = (at(r + h).tangent - at(r - h).tangent) / (2.0 * h);
  return accel.dot(mid.normal);
}

// ---------------------------------------------------------------------------
// Families

Mat3 rotation_between(const Vec3& from, const Vec3& to) {
  const Vec3 a = from.normalized();
  const Vec3 b = to.normalized();
  const double c = a.dot(b);
  if (c > 1.0 - 1e-15) return Mat3::Identity();
  if (c < -1.0 + 1e-15) {
    Eigen::Index k;
    a.cwiseAbs().minCoeff(&k);
    const Vec3 axis = (Vec3::Unit(k) - Vec3::Unit(k).dot(a) * a).normalized();
    return Eigen::AngleAxisd(kPi, axis).toRotationMatrix();
  }
  const Vec3 axis = a.cross(b).normalized();
  return Eigen::AngleAxisd(std::acos(c), axis).toRotationMatrix();
}

namespace {

std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

std::string fmt_vec(const Vec3& v) { return fmt::format("[{:.17g}, {:.17g}, {:.17g}]", v[0], v[1], v[2]); }

// Orientation sign that makes the chart-oriented normal agree with `expected` at `s`.
int orientation_against(const Immersion& im, const Vec3& s, const AmbientTangent& expected) {
  AmbientPoint x;
  const auto d1 = first_partials(im, s, &x);
  const Vec6 n = chart_normal(x, d1);
  return n.dot(expected.stacked()) >= 0.0 ? 1 : -1;
}

constexpr double kMabHalfWidth = kPi / kSqrt2 * 0.45;

ParamBox mab_box() {
  return ParamBox{Vec3(-kMabHalfWidth, -3.0, -3.0), Vec3(kMabHalfWidth, 3.0, 3.0)};
}

AmbientPoint mab_point(const Vec3& s) {
  const double c = std::cos(s[0] * kInvSqrt2);
  const double sn = std::sin(s[0] * kInvSqrt2);
  const Vec3 p = c * Vec3(std::cos(s[1]), std::sin(s[1]), 0.0) + sn * Vec3::UnitZ();
  const Vec3 q = c * Vec3(std::cos(s[2]), std::sin(s[2]), 0.0) + sn * Vec3::UnitZ();
  return AmbientPoint{p, q};
}

AmbientPoint hat_mab_point(const Vec3& s) {
  const double c = std::cos(s[0] * kInvSqrt2);
  const double sn = std::sin(s[0] * kInvSqrt2);
  const double minus = (c - sn) * kInvSqrt2;
  const double plus = (c + sn) * kInvSqrt2;
  // a = (0, 0, 1), b = (0, 0, -1).
  const Vec3 p = minus * Vec3(std::cos(s[1]), std::sin(s[1]), 0.0) + plus * Vec3::UnitZ();
  const Vec3 q = plus * Vec3(std::cos(s[2]), std::sin(s[2]), 0.0) - minus * Vec3::UnitZ();
  return AmbientPoint{p, q};
}

// Normal of hat M_{a,b}: velocity at distance pi/(2 sqrt 2) of the normal geodesic of M_{a,b}.
AmbientTangent hat_mab_normal(const Vec3& s) {
  const AmbientTangent n = mab_normal(s);
  return geodesic_velocity(n.base, n, kMinimalDistance);
}

}  // namespace

AmbientTangent mab_normal(const Vec3& s) {
  const double c = std::cos(s[0] * kInvSqrt2);
  const double sn = std::sin(s[0] * kInvSqrt2);
  const Vec3 u2(std::cos(s[1]), std::sin(s[1]), 0.0);
  const Vec3 u3(std::cos(s[2]), std::sin(s[2]), 0.0);
  const Vec3 a = Vec3::UnitZ();
  const Vec3 b = -Vec3::UnitZ();
  const Vec3 n1 = -kInvSqrt2 * sn * u2 + kInvSqrt2 * c * a;
  const Vec3 n2 = kInvSqrt2 * sn * u3 + kInvSqrt2 * c * b;
  return AmbientTangent::make(mab_point(s), n1, n2);
}

Immersion family_Mt(double t) {
  if (!(std::abs(t) < 1.0)) throw DomainError("M_t requires |t| < 1");
  const double w = std::sqrt(1.0 - t * t);
  auto eval = [t, w](const Vec3& s) {
    const double st = std::sin(s[0]), ct = std::cos(s[0]);
    const double sp = std::sin(s[1]), cp = std::cos(s[1]);
    const Vec3 p(st * cp, st * sp, ct);
    const Vec3 e1(ct * cp, ct * sp, -st);
    const Vec3 e2(-sp, cp, 0.0);
    const Vec3 q = t * p + w * (std::cos(s[2]) * e1 + std::sin(s[2]) * e2);
    return AmbientPoint{p, q};
  };
  const double cap = 0.1;
  Immersion im("mt", eval, ParamBox{Vec3(cap, -kPi, -kPi), Vec3(kPi - cap, kPi, kPi)});
  im.set_metadata("family", "mt").set_metadata("t", fmt_double(t));
  return im;
}

Immersion family_Mab() { return family_Mab(Vec3::UnitZ(), -Vec3::UnitZ()); }

Immersion family_Mab(const Vec3& a, const Vec3& b) {
  const Mat3 ra = rotation_between(Vec3::UnitZ(), a);
  const Mat3 rb = rotation_between(-Vec3::UnitZ(), b);
  auto eval = [ra, rb](const Vec3& s) {
    const AmbientPoint x = mab_point(s);
    return AmbientPoint{ra * x.p, rb * x.q};
  };
  Immersion im("mab", eval, mab_box());
  // Factor rotations preserve the chart orientation, so the canonical normal fixes the sign.
  const Immersion canonical("mab", mab_point, mab_box());
  const Vec3 s0 = Vec3(0.1, 0.2, -0.3);
  im = im.with_orientation(orientation_against(canonical, s0, mab_normal(s0)));
  im.set_metadata("family", "mab").set_metadata("a", fmt_vec(a.normalized())).set_metadata("b", fmt_vec(b.normalized()));
  return im;
}

Immersion family_hatMab() { return family_hatMab(Vec3::UnitZ(), -Vec3::UnitZ()); }

Immersion family_hatMab(const Vec3& a, const Vec3& b) {
  const Mat3 ra = rotation_between(Vec3::UnitZ(), a);
  const Mat3 rb = rotation_between(-Vec3::UnitZ(), b);
  auto eval = [ra, rb](const Vec3& s) {
    const AmbientPoint x = hat_mab_point(s);
    return AmbientPoint{ra * x.p, rb * x.q};
  };
  Immersion im("hat-mab", eval, mab_box());
  const Immersion canonical("hat-mab", hat_mab_point, mab_box());
  const Vec3 s0 = Vec3(0.1, 0.2, -0.3);
  im = im.with_orientation(orientation_against(canonical, s0, hat_mab_normal(s0)));
  im.set_metadata("family", "hat-mab")
      .set_metadata("a", fmt_vec(a.normalized()))
      .set_metadata("b", fmt_vec(b.normalized()));
  return im;
}

Immersion family_prop61(double C, const CurveOnSphere& gamma, const CurveOnSphere& gamma_tilde) {
  if (!(std::abs(C) < 1.0)) throw DomainError("product angle C must satisfy |C| < 1");
  const double alpha = std::sqrt(0.5 * (1.0 - C));
  const double beta = std::sqrt(0.5 * (1.0 + C));
  auto eval = [alpha, beta, gamma, gamma_tilde](const Vec3& s) {
    const auto g = gamma.at(s[1]);
    const auto gt = gamma_tilde.at(s[2]);
    const Vec3 p = std::cos(alpha * s[0]) * g.position + std::sin(alpha * s[0]) * g.normal;
    const Vec3 q = std::cos(beta * s[0]) * gt.position + std::sin(beta * s[0]) * gt.normal;
    return AmbientPoint{p, q};
  };
  // dp/dr = (cos(alpha t) - kappa sin(alpha t)) gamma', so keep alpha |t| well below atan(1/|kappa|).
  auto max_curvature = [](const CurveOnSphere& c, double lo, double hi) {
    double k = 0.0;
    for (int i = 0; i <= 64; ++i) k = std::max(k, std::abs(c.curvature(lo + (hi - lo) * i / 64.0)));
    return k;
  };
  auto range = [](const CurveOnSphere& c) {
    const double L = c.length();
    return std::pair{0.02 * L, 0.98 * L};
  };
  const auto [r0, r1] = range(gamma);
  const auto [q0, q1] = range(gamma_tilde);
  const double k1 = max_curvature(gamma, r0, r1);
  const double k2 = max_curvature(gamma_tilde, q0, q1);
  double tmax = 0.6;
  tmax = std::min(tmax, 0.7 * std::atan2(1.0, k1) / alpha);
  tmax = std::min(tmax, 0.7 * std::atan2(1.0, k2) / beta);
  Immersion im("prop61", eval, ParamBox{Vec3(-tmax, r0, q0), Vec3(tmax, r1, q1)});
  im.set_metadata("family", "prop61").set_metadata("C", fmt_double(C));
  return im;
}

}  // namespace prodgeom
