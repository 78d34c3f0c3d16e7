#pragma once

// Minimal C = 0 hypersurfaces with non-constant b2 from solutions of
// h_uu + h_vv = -(1/sqrt 2) sinh(sqrt 2 h), and the intrinsic data
// (g, A, P~) they define on (u, v, t)-space.

#include "prodgeom/verify.hpp"

#include <functional>
#include <string>
#include <vector>

namespace prodgeom {

/// Node values h(u_i, v_j) with u_i = u0 + i du, v_j = v0 + j dv; boundary nodes included.
struct GridSolution {
  int nu = 0;
  int nv = 0;
  double u0 = 0.0;
  double v0 = 0.0;
  double du = 0.0;
  double dv = 0.0;
  std::vector<double> h;  // h[i * nv + j]
  double residual = 0.0;
  std::string boundary;

  double& at(int i, int j) { return h[static_cast<std::size_t>(i) * nv + j]; }
  double at(int i, int j) const { return h[static_cast<std::size_t>(i) * nv + j]; }
  double u(int i) const { return u0 + i * du; }
  double v(int j) const { return v0 + j * dv; }
};

struct Domain {
  double u0 = 0.0, u1 = 1.0;
  double v0 = 0.0, v1 = 1.0;
};

struct SolverOptions {
  int max_iter = 60;
  double tol = 1e-10;
  double inner_reduction = 1e-3;  // inexact Newton: inner residual target relative to outer
  int max_sweeps = 100000;
  int max_halvings = 20;
  int divergence_window = 10;
  double omega = 0.0;  // SOR factor; 0 picks the Laplacian optimum, 1 is plain Gauss-Seidel
};

class NonconvergenceError : public Error {
 public:
  NonconvergenceError(const std::string& what, GridSolution last, std::vector<double> trace)
      : Error(what), last_(std::move(last)), trace_(std::move(trace)) {}
  const GridSolution& last_iterate() const { return last_; }
  const std::vector<double>& residual_trace() const { return trace_; }

 private:
  GridSolution last_;
  std::vector<double> trace_;
};

using BoundaryFn = std::function<double(double u, double v)>;

/// Damped Newton with red-black SOR inner solves; Dirichlet data from `boundary`.
/// `init` (nu * nv values) seeds the interior; zero otherwise.
GridSolution solve_sinh_gordon(const Domain& domain, int nu, int nv, const BoundaryFn& boundary,
                               const std::vector<double>* init = nullptr, const SolverOptions& opts = {},
                               const std::string& label = "custom");

/// Discrete residual Laplacian_h h + (1/sqrt 2) sinh(sqrt 2 h) at an interior node.
double residual_at(const GridSolution& gs, int i, int j);
double max_residual(const GridSolution& gs);

/// H(u) with H'' = -(1/sqrt 2) sinh(sqrt 2 H), H(0) = 0.5, H'(0) = 0 (RK4).
double soliton_profile(double u);
BoundaryFn zero_boundary();
BoundaryFn soliton_boundary();

/// Bilinear interpolation of node values; the first partials use node central
/// differences and need one node of margin from the boundary.
double interpolate_h(const GridSolution& gs, double u, double v);
Eigen::Vector2d interpolate_gradient(const GridSolution& gs, double u, double v);

struct BFields {
  double b1 = 0.0, b2 = 0.0, b4 = 0.0;
};

/// Throws ExcludedSetError when cos^2(t/sqrt 2) + sinh^2(h/sqrt 2) < 1e-10.
BFields b_fields(double h, double t);
BFields b_fields(const GridSolution& gs, double u, double v, double t);

struct IntrinsicData {
  Mat3 g3;  // metric on (d_u, d_v, d_t)
  Mat3 A3;  // column k = A d_k
  Mat4 P4;  // column k = P~ applied to (d_u, d_v, d_t, N)[k]
  double hu = 0.0, hv = 0.0;
};

IntrinsicData intrinsic_data(double h, double hu, double hv, double t);
IntrinsicData intrinsic_data(const GridSolution& gs, double u, double v, double t);

/// a1, a2 of the adapted coordinates and d1, d2; E frame columns in (u, v, t).
struct AdaptedFrame {
  double a1 = 0.0, a2 = 0.0, d1 = 0.0, d2 = 0.0;
  Mat3 E;  // column a = E_{a+1} in coordinates
};
AdaptedFrame adapted_frame(double h, double hu, double hv, double t);

/// |(a1 + i a2)^2 (2 (b1 - i b2)^2 + 1) - 1|.
double coordinate_relation_residual(double h, double t);

/// Residual of the C = 0 frame system and Lie bracket relations at node (i, j),
/// with grid-aligned central differences. Needs i, j at least 2 from the edge.
struct NodeResiduals {
  double frame_system = 0.0;  // check (e)
  double bracket_vs_pde = 0.0;  // check (f)
  double flatness = 0.0;        // adapted-coordinate system
};
NodeResiduals node_residuals(const GridSolution& gs, int i, int j, double t);

/// Checks (a)-(f). (a)-(d) at seeded off-grid points; (e), (f) at every node
/// two or more steps from the edge, for a few seeded t values.
std::vector<CheckReport> intrinsic_checks(const GridSolution& gs, std::size_t n_samples, std::uint64_t seed);

CheckReport coordinate_solution_check(const GridSolution& gs, std::size_t n_samples, std::uint64_t seed);

/// `<stem>.json` header plus `<stem>.csv` rows u,v,h (17 significant digits).
void save_archive(const GridSolution& gs, const std::string& stem);
/// Accepts the stem or either file path.
GridSolution load_archive(const std::string& path);

}  // namespace prodgeom
