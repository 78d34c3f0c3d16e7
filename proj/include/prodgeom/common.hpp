#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace prodgeom {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat6x3 = Eigen::Matrix<double, 6, 3>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2 = 0.70710678118654752440;

// Normal distance at which the parallel hypersurface of a constant
// curvature hypersurface becomes minimal: pi / (2 sqrt 2).
inline constexpr double kMinimalDistance = kPi / (2.0 * kSqrt2);

/// Numerical thresholds shared by every module.
struct Tolerances {
  double unit = 1e-12;          // |p| = |q| = 1, tangency
  double gram_min = 1e-8;       // Gram determinant of the chart partials
  double c_degenerate = 1e-6;   // C^2 < 1 - c_degenerate for the adapted frame
  double algebraic = 1e-5;      // frame-level and algebraic identities
  double second_order = 1e-3;   // identities that need second-order differencing
  double excluded_set = 1e-10;  // distance to the sinh-Gordon exclusion set
  double focal = 1e-10;         // |det B| below this is a focal point
};

inline const Tolerances& default_tolerances() {
  static const Tolerances t{};
  return t;
}

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke a precondition on arguments (mismatched base points, bad flags).
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of the operation (|t| >= 1, too close to the box edge).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The chart partials are (numerically) linearly dependent.
class SingularChartError : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of a closed-form formula is not met by the input.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Sample too close to the set where the sinh-Gordon b-fields blow up.
class ExcludedSetError : public Error {
 public:
  using Error::Error;
};

class FocalPointError : public Error {
 public:
  FocalPointError(const std::string& what, double r) : Error(what), r_(r) {}
  double r() const { return r_; }

 private:
  double r_;
};

}  // namespace prodgeom
