#pragma once

// Per-point frame data of a hypersurface M in S^2 x S^2: unit normal, product
// angle C, X = PN - CN, the adapted frame E1, E2, E3 and the shape operator.
//
// Normal orientation: the chart-oriented normal makes
// det[(p,0), (0,q), d1_1, d1_2, d1_3, N] positive; it is then multiplied by
// Immersion::orientation(), and by the side of the normal hint when the
// immersion has one (parallel hypersurfaces use gamma'(r), which stays
// continuous across focal sets where the chart orientation flips).

#include "prodgeom/immersions.hpp"

namespace prodgeom {

struct FrameTolerance {
  double c_degenerate = 1e-6;
  double residual_tol = 1e-5;
};

/// Algebraic data at a point, expressed in an orthonormal tangent basis F.
/// T is the matrix of Y -> tangential part of PY, mu_a = g(PF_a, N),
/// X_a = g(X, F_a). A and T are symmetric.
struct PointTensors {
  Mat3 A = Mat3::Zero();
  Mat3 T = Mat3::Identity();
  Vec3 X = Vec3::Zero();
  Vec3 mu = Vec3::Zero();
  double C = 0.0;
};

/// Same data in the parameter chart: mixed tensors act on coordinate vectors.
struct ChartTensors {
  Mat3 G;    // induced metric
  Mat3 A;    // A d_i = sum_k A(k, i) d_k
  Mat3 T;    // T d_i = sum_k T(k, i) d_k
  Vec3 mu;   // mu(d_i)
  Vec3 X;    // X = sum_k X(k) d_k
  double C;
};

struct FrameData {
  AmbientPoint point;
  std::array<AmbientTangent, 3> tangent;  // chart partials d1_i
  AmbientTangent N;
  double C = 0.0;
  AmbientTangent X;

  // E1, E2, E3 when has_E; otherwise a Gram-Schmidt basis of the partials.
  bool has_E = false;
  std::array<AmbientTangent, 3> E;

  Mat3 T;                  // in the E (or fallback) basis
  Vec3 mu;
  Mat3 b_matrix;           // g(A E_a, E_b)
  std::array<double, 6> b; // b1 .. b6

  Mat3 G;            // induced metric of the chart
  Mat3 frame_coeff;  // E_a = sum_i frame_coeff(i, a) d_i

  PointTensors tensors() const;
};

/// Chart-oriented unit normal (raw stacked vector). Throws SingularChartError.
Vec6 chart_normal(const AmbientPoint& x, const std::array<Vec6, 3>& d1);

AmbientTangent unit_normal(const Jet2& j, int orientation = 1);

FrameData build_frame(const Jet2& j, int orientation = 1, const FrameTolerance& tol = {});
FrameData build_frame(const Immersion& im, const Vec3& s, const FrameTolerance& tol = {});

ChartTensors chart_tensors(const Jet2& j, int orientation = 1);
ChartTensors chart_tensors(const Immersion& im, const Vec3& s);

/// Weingarten matrix W(j, i) = -<d_i N, d1_j> from central differences of the
/// normal field (independent of the second partials used by build_frame).
Mat3 weingarten_from_normal_field(const Immersion& im, const Vec3& s);

double mean_curvature(const FrameData& f);
double mean_curvature(const PointTensors& t);

/// Ascending eigenvalues of the shape matrix.
Vec3 principal_curvatures(const FrameData& f);
Vec3 principal_curvatures(const PointTensors& t);

}  // namespace prodgeom
