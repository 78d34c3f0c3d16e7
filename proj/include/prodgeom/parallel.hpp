#pragma once

// Parallel hypersurfaces Phi_r(M) = exp(r N) of a C = 0 hypersurface: the
// Jacobi-field tangent map B, its determinant, the shape operator A_r and the
// mean curvature along the normal flow.

#include "prodgeom/verify.hpp"

#include <utility>
#include <vector>

namespace prodgeom {

/// Source shape entries in the adapted frame (b3 = b5 = b6 = 0 assumed).
struct ParallelParams {
  double r = 0.0;
  double b1 = 0.0, b2 = 0.0, b4 = 0.0;
};

/// (cos sqrt2 r, sin sqrt2 r), exact 0 / +-1 when sqrt2 r is a multiple of pi/2 up to rounding.
std::pair<double, double> trig_sqrt2(double r);

/// Rows are the coefficients of (Phi_r)_* E_i in the transported frame E^r.
Mat3 B_matrix(const ParallelParams& pp);
double det_B(const ParallelParams& pp);
/// Rows are -Y_i'(r) in the transported frame.
Mat3 D_matrix(const ParallelParams& pp);

/// Closed-form entries. Throws FocalPointError when |det B| <= 1e-10.
Mat3 A_r(const ParallelParams& pp);
/// B^{-1} D, the same matrix by the Jacobi-field route.
Mat3 A_r_jacobi(const ParallelParams& pp);

/// H(r) for b1 b4 - b2^2 = 1/2 (ContractError otherwise, tolerance 1e-6).
double mean_curvature_r(const ParallelParams& pp);

/// (lambda_12, lambda_3) Ricci eigenvalues of the parallel of a minimal source (b4 = -b1).
std::pair<double, double> parallel_ricci_minimal(double b1, double b2, double r);

/// params -> exp(r N(params)), normal from a fourth-order difference of `im`.
/// The result is oriented along the geodesic velocity at distance r.
Immersion parallel_immersion(const Immersion& im, double r);

/// |<p,a>^2 + <q,b>^2 - 1|.
double hat_mab_membership(const AmbientPoint& x, const Vec3& a, const Vec3& b);

/// Membership of Phi_r(im) in \hat M_{a,b}; a, b from the immersion metadata.
CheckReport membership_check(const Immersion& im, double r, const VerifyParams& params = {});

/// Requires the constant-curvature probe (kappa spread < 1e-4); then measures
/// |H| and |C| on the parallel at distance r. Reports "theorem46_H", "theorem46_C".
std::vector<CheckReport> theorem46_check(const Immersion& im, const VerifyParams& params = {},
                                         double r = kMinimalDistance);

struct SweepRow {
  double r = 0.0;
  double H_mean = 0.0;
  double H_max = 0.0;     // max |H|
  double C_max = 0.0;     // max |C|
  double detB_min = 0.0;  // min |det B|
};

/// Evenly spaced r values (steps intervals) plus pi/(2 sqrt 2) when it lies inside.
/// Throws FocalPointError when |det B| <= 1e-10 at a sample.
std::vector<SweepRow> sweep(const Immersion& im, double r_min, double r_max, int steps,
                            const VerifyParams& params = {});

}  // namespace prodgeom
