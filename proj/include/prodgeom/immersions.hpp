#pragma once

// Parametrized hypersurfaces of S^2 x S^2 and their finite-difference jets.

#include "prodgeom/ambient.hpp"

#include <array>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <string>

namespace prodgeom {

/// Open box lo < s < hi in parameter space.
struct ParamBox {
  Vec3 lo;
  Vec3 hi;

  bool contains(const Vec3& s, double margin = 0.0) const;
  Vec3 center() const { return 0.5 * (lo + hi); }
  /// Uniform sample from the box shrunk by `shrink` (fraction of each side) on every side.
  Vec3 sample(std::mt19937_64& rng, double shrink = 0.1) const;
};

class Immersion {
 public:
  using Map = std::function<AmbientPoint(const Vec3&)>;
  /// Ambient R^6 vector the normal at s should point along.
  using NormalHint = std::function<Vec6(const Vec3&)>;

  Immersion(std::string name, Map eval, ParamBox box, double fd_step = 1e-4);

  AmbientPoint operator()(const Vec3& s) const { return (*eval_)(s); }

  const std::string& name() const { return name_; }
  const ParamBox& box() const { return box_; }
  double fd_step() const { return fd_step_; }

  /// +1 or -1; multiplies the chart-oriented unit normal (see frames.hpp).
  int orientation() const { return orientation_; }

  Immersion with_fd_step(double step) const;
  Immersion with_orientation(int sign) const;
  Immersion with_box(const ParamBox& box) const;
  Immersion with_normal_hint(NormalHint hint) const;

  bool has_normal_hint() const { return static_cast<bool>(hint_); }
  /// Sign applied to the chart-oriented normal `chart_n` at s: orientation(),
  /// times the side of the hint when one is set.
  int orientation_at(const Vec3& s, const Vec6& chart_n) const;

  /// Family parameters carried into reports.
  const std::map<std::string, std::string>& metadata() const { return metadata_; }
  Immersion& set_metadata(const std::string& key, const std::string& value);

 private:
  std::string name_;
  std::shared_ptr<const Map> eval_;
  ParamBox box_;
  double fd_step_;
  int orientation_ = 1;
  std::shared_ptr<const NormalHint> hint_;
  std::map<std::string, std::string> metadata_;
};

/// Position, first partials (tangent-projected) and second partials of an immersion.
struct Jet2 {
  AmbientPoint point;
  std::array<Vec6, 3> d1;
  // Ordered (11, 12, 13, 22, 23, 33); ambient R^6 vectors, not projected.
  std::array<Vec6, 6> d2;

  const Vec6& second(int i, int j) const;
  Mat6x3 d1_matrix() const;
};

/// Central differences with the immersion's fd_step. Throws DomainError when
/// `s` is closer than 2 * fd_step to the box boundary.
Jet2 jet(const Immersion& im, const Vec3& s);

/// First partials only (cheaper; same stencil as jet().d1).
std::array<Vec6, 3> first_partials(const Immersion& im, const Vec3& s, AmbientPoint* point = nullptr);

/// Arc-length parametrized regular curve in S^2 with its unit normal N = gamma x gamma'.
class CurveOnSphere {
 public:
  struct Sample {
    Vec3 position;
    Vec3 tangent;
    Vec3 normal;
  };

  /// Circle of latitude at polar angle theta0 in (0, pi); geodesic curvature cot(theta0).
  static CurveOnSphere latitude(double theta0);

  /// Re-parametrizes an arbitrary regular curve f on [s0, s1] by arc length.
  /// `df` is its derivative; f need not lie on the sphere (it is normalized).
  static CurveOnSphere from_function(std::function<Vec3(double)> f, std::function<Vec3(double)> df,
                                     double s0, double s1);

  /// Interpolates samples (s, x, y, z) with a natural cubic spline, then re-parametrizes.
  static CurveOnSphere from_samples(const std::vector<double>& s, const std::vector<Vec3>& xyz);

  /// Reads `s,x,y,z` rows with a header line.
  static CurveOnSphere from_csv(const std::string& path);

  Sample at(double r) const;
  double length() const { return length_; }
  /// Geodesic curvature kappa(r), with gamma'' = -gamma + kappa N.
  double curvature(double r) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  double length_ = 0.0;
};

/// M_t = {<p, q> = t}: chart (theta, phi, psi) with q = t p + sqrt(1 - t^2)(cos psi e1 + sin psi e2).
Immersion family_Mt(double t);

/// M_{a,b} = {<p,a> + <q,b> = 0}; canonical a = (0,0,1), b = (0,0,-1).
Immersion family_Mab();
Immersion family_Mab(const Vec3& a, const Vec3& b);

/// \hat M_{a,b} = {<p,a>^2 + <q,b>^2 = 1}, the parallel of M_{a,b} at distance pi/(2 sqrt 2).
Immersion family_hatMab();
Immersion family_hatMab(const Vec3& a, const Vec3& b);

/// Constant product angle C with b2 = 0, swept out by two curves (parameters t, r, s).
Immersion family_prop61(double C, const CurveOnSphere& gamma, const CurveOnSphere& gamma_tilde);

/// Closed-form unit normal of the canonical M_{a,b} chart at (t1, t2, t3).
AmbientTangent mab_normal(const Vec3& params);

/// Rotation taking `from` to `to` (both unit).
Mat3 rotation_between(const Vec3& from, const Vec3& to);

}  // namespace prodgeom
