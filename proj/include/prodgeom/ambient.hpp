#pragma once

// Closed-form geometry of S^2 x S^2 embedded in R^3 x R^3.
//
// A tangent vector at (p, q) is stored as a pair of 3-vectors (v, w) with
// v.p = 0 and w.q = 0. Constructors re-project onto the tangent space.

#include "prodgeom/common.hpp"

namespace prodgeom {

struct AmbientPoint {
  Vec3 p = Vec3::UnitX();
  Vec3 q = Vec3::UnitZ();

  /// Normalizes both factors. Throws DomainError for a zero factor.
  static AmbientPoint make(const Vec3& p, const Vec3& q);

  Vec6 stacked() const;
  bool same_as(const AmbientPoint& other, double tol = 1e-12) const;
};

struct AmbientTangent {
  AmbientPoint base;
  Vec3 v = Vec3::Zero();
  Vec3 w = Vec3::Zero();

  /// Projects v onto p-perp and w onto q-perp.
  static AmbientTangent make(const AmbientPoint& base, const Vec3& v, const Vec3& w);
  static AmbientTangent from_stacked(const AmbientPoint& base, const Vec6& vw);

  Vec6 stacked() const;
  double norm() const;

  AmbientTangent operator+(const AmbientTangent& o) const;
  AmbientTangent operator-(const AmbientTangent& o) const;
  AmbientTangent operator-() const;
  AmbientTangent operator*(double s) const;
};

inline AmbientTangent operator*(double s, const AmbientTangent& y) { return y * s; }

enum class Kahler { J1 = 1, J2 = 2 };

/// Product metric. Throws UsageError when the base points differ.
double metric_g(const AmbientTangent& y, const AmbientTangent& z);

/// P(v, w) = (v, -w).
AmbientTangent product_P(const AmbientTangent& y);

/// J1(v, w) = (p x v, q x w); J2(v, w) = (p x v, -(q x w)).
AmbientTangent complex_J(Kahler which, const AmbientTangent& y);
AmbientTangent complex_J(int which, const AmbientTangent& y);

/// Curvature tensor R(U, Y, Z, W) of the product metric.
double ambient_R(const AmbientTangent& u, const AmbientTangent& y, const AmbientTangent& z,
                 const AmbientTangent& w);

/// Sectional curvature of the plane spanned by two (not necessarily orthonormal) tangents.
double ambient_sectional(const AmbientTangent& u, const AmbientTangent& y);

struct Geodesic {
  AmbientPoint start;
  AmbientTangent direction;

  /// Normalizes `direction` to unit g-norm. Throws DomainError for a zero direction.
  static Geodesic make(const AmbientPoint& start, const AmbientTangent& direction);
};

/// Exponential map: per-factor great-circle motion with speed |v| and |w|.
AmbientPoint geodesic_exp(const AmbientPoint& start, const AmbientTangent& dir, double t);

/// Velocity gamma'(t) of t -> geodesic_exp(start, dir, t).
AmbientTangent geodesic_velocity(const AmbientPoint& start, const AmbientTangent& dir, double t);

/// Parallel transport of y0 (based at geo.start) to time t.
AmbientTangent transport_frame(const Geodesic& geo, const AmbientTangent& y0, double t);

// Raw R^6 helpers shared with the hypersurface code. `vw` must be tangent at (p, q).
namespace raw {

inline Vec6 stack(const Vec3& a, const Vec3& b) {
  Vec6 out;
  out << a, b;
  return out;
}

inline Vec6 apply_P(const Vec6& vw) {
  Vec6 out = vw;
  out.tail<3>() *= -1.0;
  return out;
}

inline Vec6 apply_J(int which, const AmbientPoint& x, const Vec6& vw) {
  const Vec3 jv = x.p.cross(vw.head<3>());
  const Vec3 jw = x.q.cross(vw.tail<3>());
  return stack(jv, which == 1 ? jw : Vec3(-jw));
}

/// Removes the components along (p, 0) and (0, q).
inline Vec6 project_tangent(const AmbientPoint& x, const Vec6& vw) {
  Vec6 out = vw;
  out.head<3>() -= out.head<3>().dot(x.p) * x.p;
  out.tail<3>() -= out.tail<3>().dot(x.q) * x.q;
  return out;
}

/// Orthonormal basis (as columns) of the 4-dimensional tangent space at x.
Eigen::Matrix<double, 6, 4> tangent_basis(const AmbientPoint& x);

/// Ambient curvature on raw tangent vectors at a common base point.
double curvature(const Vec6& u, const Vec6& y, const Vec6& z, const Vec6& w);

}  // namespace raw

}  // namespace prodgeom
