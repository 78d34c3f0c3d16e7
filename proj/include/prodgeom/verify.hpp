#pragma once

// Residual checks of the structure equations of a hypersurface in S^2 x S^2.
//
// Covariant derivatives are taken in the parameter chart: Christoffel symbols
// come from central differences of the induced metric, tensor fields are
// differenced with the outer step H = outer_factor * fd_step. Residual tensors
// are measured in an orthonormal basis before taking the max.

#include "prodgeom/frames.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace prodgeom {

struct CheckReport {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  std::size_t samples = 0;
  bool pass = false;
  std::map<std::string, std::string> metadata;

  /// pass = (max_residual <= tolerance); NaN never passes.
  void finalize();
};

/// Tolerance used for informational entries that never fail.
inline constexpr double kInformational = std::numeric_limits<double>::max();

struct VerifyParams {
  std::size_t n_samples = 30;
  std::uint64_t seed = 1;
  double outer_factor = 10.0;
  double sample_shrink = 0.1;
  std::size_t planes = 20;
  double algebraic_tol = 1e-5;
  double second_order_tol = 1e-3;
};

/// Seeded parameter samples from the box shrunk by params.sample_shrink.
std::vector<Vec3> sample_params(const Immersion& im, const VerifyParams& params);

// ---------------------------------------------------------------------------
// Pointwise algebra on PointTensors (orthonormal basis coordinates)

/// g(R(e_a, e_b) e_c, e_d) from the Gauss equation.
double gauss_R(const PointTensors& t, int a, int b, int c, int d);

/// K(U, Y) = g(R(U,Y)Y, U) for an orthonormal pair given in basis coordinates.
double sectional_curvature(const PointTensors& t, const Vec3& u, const Vec3& y);
double sectional_curvature(const FrameData& f, const AmbientTangent& u, const AmbientTangent& y);

struct TsinghuaResult {
  double equality_residual = 0.0;  // max |S I - RHS| over basis quadruples
  double rhs_magnitude = 0.0;      // max |RHS|
};

TsinghuaResult tsinghua_identity(const PointTensors& t);

struct RicciResult {
  Mat3 ricci;             // in the frame basis
  double scalar_trace;    // trace of ricci
  double scalar_formula;  // 2 + 9 H^2 - |A|^2
};

/// Uses the explicit E-frame expression when f.has_E, the tensor form otherwise.
RicciResult ricci_scalar(const FrameData& f);
/// Tensor form: Ric = (I - C T + X X^T)/2 + 3 H A - A^2.
RicciResult ricci_scalar(const PointTensors& t);
/// Contraction of gauss_R; an independent path for tests.
Mat3 ricci_contracted(const PointTensors& t);

/// Residuals of the constant-C frame system at one point (b3, b5, b6 and
/// the E-derivative equations), max abs.
double lemma23_point_residual(const Immersion& im, const Vec3& s, double outer_step);

// ---------------------------------------------------------------------------
// Sampled checks

CheckReport gauss_crosscheck(const Immersion& im, const VerifyParams& params = {});
CheckReport codazzi_residual(const Immersion& im, const VerifyParams& params = {});
CheckReport lemma21_residuals(const Immersion& im, const VerifyParams& params = {});
CheckReport lemma23_residuals(const Immersion& im, const VerifyParams& params = {});
CheckReport frame_identities(const Immersion& im, const VerifyParams& params = {});
/// Two reports: the equality residual, then the right-side magnitude
/// (informational unless rhs_tol is given).
std::vector<CheckReport> tsinghua_check(const Immersion& im, const VerifyParams& params = {},
                                        std::optional<double> rhs_tol = std::nullopt);

struct ProbeExpectations {
  std::optional<double> C;
  std::optional<double> H;
  std::optional<double> kappa;       // constant sectional curvature value
  std::optional<double> det_b;       // b1 b4 - b2^2
  bool constant_principal = false;   // principal curvatures constant across samples
  double c_tol = 1e-8;
  double h_tol = 1e-6;
  double kappa_tol = 1e-5;
  double det_b_tol = 1e-5;
  double principal_tol = 1e-5;
};

/// Expectations for the built-in families, read from Immersion::metadata().
ProbeExpectations probe_expectations(const Immersion& im);

std::vector<CheckReport> classification_probe(const Immersion& im, const VerifyParams& params,
                                              const ProbeExpectations& expect);

/// Everything the CLI `verify` command runs.
std::vector<CheckReport> verify_suite(const Immersion& im, const VerifyParams& params = {});

}  // namespace prodgeom
