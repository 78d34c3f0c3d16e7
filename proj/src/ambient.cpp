#include "prodgeom/ambient.hpp"

#include <cmath>

namespace prodgeom {

namespace {

Vec3 unit_or_throw(const Vec3& x, const char* what) {
  const double n = x.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw DomainError(what);
  return x / n;
}

Vec3 project(const Vec3& base, const Vec3& x) { return x - x.dot(base) * base; }

void require_same_base(const AmbientPoint& a, const AmbientPoint& b) {
  if (!a.same_as(b)) throw UsageError("tangent vectors are based at different points");
}

// Great-circle motion of a single factor: returns (position, velocity).
std::pair<Vec3, Vec3> factor_geodesic(const Vec3& p, const Vec3& v, double t) {
  const double speed = v.norm();
  if (speed == 0.0) return {p, Vec3::Zero()};
  const Vec3 e = v / speed;
  const double c = std::cos(speed * t);
  const double s = std::sin(speed * t);
  return {c * p + s * e, speed * (c * e - s * p)};
}

// Rotates the (p, e) plane by angle speed * t; the complement is fixed.
Vec3 factor_transport(const Vec3& p, const Vec3& v, const Vec3& x, double t) {
  const double speed = v.norm();
  if (speed == 0.0) return x;
  const Vec3 e = v / speed;
  const double along = x.dot(e);
  const double c = std::cos(speed * t);
  const double s = std::sin(speed * t);
  return x - along * e + along * (c * e - s * p);
}

}  // namespace

AmbientPoint AmbientPoint::make(const Vec3& p, const Vec3& q) {
  return AmbientPoint{unit_or_throw(p, "zero first factor"), unit_or_throw(q, "zero second factor")};
}

Vec6 AmbientPoint::stacked() const { return raw::stack(p, q); }

bool AmbientPoint::same_as(const AmbientPoint& other, double tol) const {
  return (p - other.p).cwiseAbs().maxCoeff() <= tol && (q - other.q).cwiseAbs().maxCoeff() <= tol;
}

AmbientTangent AmbientTangent::make(const AmbientPoint& base, const Vec3& v, const Vec3& w) {
  return AmbientTangent{base, project(base.p, v), project(base.q, w)};
}

AmbientTangent AmbientTangent::from_stacked(const AmbientPoint& base, const Vec6& vw) {
  return make(base, vw.head<3>(), vw.tail<3>());
}

Vec6 AmbientTangent::stacked() const { return raw::stack(v, w); }

double AmbientTangent::norm() const { return std::sqrt(v.squaredNorm() + w.squaredNorm()); }

AmbientTangent AmbientTangent::operator+(const AmbientTangent& o) const {
  require_same_base(base, o.base);
  return AmbientTangent{base, v + o.v, w + o.w};
}

AmbientTangent AmbientTangent::operator-(const AmbientTangent& o) const {
  require_same_base(base, o.base);
  return AmbientTangent{base, v - o.v, w - o.w};
}

AmbientTangent AmbientTangent::operator-() const { return AmbientTangent{base, -v, -w}; }

AmbientTangent AmbientTangent::operator*(double s) const { return AmbientTangent{base, s * v, s * w}; }

double metric_g(const AmbientTangent& y, const AmbientTangent& z) {
  require_same_base(y.base, z.base);
  return y.v.dot(z.v) + y.w.dot(z.w);
}

AmbientTangent product_P(const AmbientTangent& y) { return AmbientTangent{y.base, y.v, -y.w}; }

AmbientTangent complex_J(Kahler which, const AmbientTangent& y) {
  const Vec3 jv = y.base.p.cross(y.v);
  const Vec3 jw = y.base.q.cross(y.w);
  return AmbientTangent{y.base, jv, which == Kahler::J1 ? jw : Vec3(-jw)};
}

AmbientTangent complex_J(int which, const AmbientTangent& y) {
  if (which != 1 && which != 2) throw UsageError("complex structure index must be 1 or 2");
  return complex_J(which == 1 ? Kahler::J1 : Kahler::J2, y);
}

double ambient_R(const AmbientTangent& u, const AmbientTangent& y, const AmbientTangent& z,
                 const AmbientTangent& w) {
  require_same_base(u.base, y.base);
  require_same_base(u.base, z.base);
  require_same_base(u.base, w.base);
  return raw::curvature(u.stacked(), y.stacked(), z.stacked(), w.stacked());
}

double ambient_sectional(const AmbientTangent& u, const AmbientTangent& y) {
  const double area = metric_g(u, u) * metric_g(y, y) - std::pow(metric_g(u, y), 2);
  if (!(area > 0.0)) throw UsageError("sectional curvature needs two independent vectors");
  return ambient_R(u, y, y, u) / area;
}

Geodesic Geodesic::make(const AmbientPoint& start, const AmbientTangent& direction) {
  require_same_base(start, direction.base);
  const double n = direction.norm();
  if (!(n > 0.0)) throw DomainError("geodesic direction is zero");
  return Geodesic{start, direction * (1.0 / n)};
}

AmbientPoint geodesic_exp(const AmbientPoint& start, const AmbientTangent& dir, double t) {
  const auto [p, vp] = factor_geodesic(start.p, dir.v, t);
  const auto [q, vq] = factor_geodesic(start.q, dir.w, t);
  return AmbientPoint{p, q};
}

AmbientTangent geodesic_velocity(const AmbientPoint& start, const AmbientTangent& dir, double t) {
  const auto [p, vp] = factor_geodesic(start.p, dir.v, t);
  const auto [q, vq] = factor_geodesic(start.q, dir.w, t);
  return AmbientTangent{AmbientPoint{p, q}, vp, vq};
}

AmbientTangent transport_frame(const Geodesic& geo, const AmbientTangent& y0, double t) {
  require_same_base(geo.start, y0.base);
  const AmbientPoint end = geodesic_exp(geo.start, geo.direction, t);
  return AmbientTangent{end, factor_transport(geo.start.p, geo.direction.v, y0.v, t),
                        factor_transport(geo.start.q, geo.direction.w, y0.w, t)};
}

namespace raw {

Eigen::Matrix<double, 6, 4> tangent_basis(const AmbientPoint& x) {
  auto sphere_basis = [](const Vec3& p) {
    // Start from the coordinate axis least aligned with p.
    Eigen::Index k;
    p.cwiseAbs().minCoeff(&k);
    const Vec3 seed = Vec3::Unit(k);
    const Vec3 e1 = (seed - seed.dot(p) * p).normalized();
    const Vec3 e2 = p.cross(e1);
    return std::pair{e1, e2};
  };
  const auto [a1, a2] = sphere_basis(x.p);
  const auto [c1, c2] = sphere_basis(x.q);
  Eigen::Matrix<double, 6, 4> b = Eigen::Matrix<double, 6, 4>::Zero();
  b.block<3, 1>(0, 0) = a1;
  b.block<3, 1>(0, 1) = a2;
  b.block<3, 1>(3, 2) = c1;
  b.block<3, 1>(3, 3) = c2;
  return b;
}

double curvature(const Vec6& u, const Vec6& y, const Vec6& z, const Vec6& w) {
  const Vec6 pu = apply_P(u);
  const Vec6 py = apply_P(y);
  return 0.5 * (y.dot(z) * u.dot(w) - u.dot(z) * y.dot(w) + py.dot(z) * pu.dot(w) -
                pu.dot(z) * py.dot(w));
}

}  // namespace raw

}  // namespace prodgeom
