#include "prodgeom/sinhgordon.hpp"

#include "prodgeom/workers.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <random>
#include <sstream>

namespace prodgeom {

namespace {

constexpr double kExclusion = 1e-10;

double nonlinearity(double h) { return kInvSqrt2 * std::sinh(kSqrt2 * h); }

void require_grid(const GridSolution& gs) {
  if (gs.nu < 3 || gs.nv < 3 || gs.h.size() != static_cast<std::size_t>(gs.nu) * gs.nv) {
    throw UsageError("grid solution is empty or inconsistent");
  }
}

}  // namespace

double residual_at(const GridSolution& gs, int i, int j) {
  const double c = gs.at(i, j);
  const double lap = (gs.at(i + 1, j) - 2.0 * c + gs.at(i - 1, j)) / (gs.du * gs.du) +
                     (gs.at(i, j + 1) - 2.0 * c + gs.at(i, j - 1)) / (gs.dv * gs.dv);
  return lap + nonlinearity(c);
}

double max_residual(const GridSolution& gs) {
  double r = 0.0;
  for (int i = 1; i < gs.nu - 1; ++i)
    for (int j = 1; j < gs.nv - 1; ++j) r = std::max(r, std::abs(residual_at(gs, i, j)));
  return r;
}

namespace {

// Red-black SOR for (L + diag(cosh(sqrt2 h))) x = rhs with x = 0 on the boundary.
// Returns the final max residual of the linear system.
double sor_solve(const GridSolution& gs, const std::vector<double>& rhs, std::vector<double>& x, double omega,
                 double target, int max_sweeps) {
  const int nu = gs.nu, nv = gs.nv;
  const double cu = 1.0 / (gs.du * gs.du);
  const double cv = 1.0 / (gs.dv * gs.dv);
  std::vector<double> diag(x.size());
  for (int i = 1; i < nu - 1; ++i)
    for (int j = 1; j < nv - 1; ++j) diag[i * nv + j] = -2.0 * cu - 2.0 * cv + std::cosh(kSqrt2 * gs.at(i, j));
  auto linear_residual = [&] {
    double r = 0.0;
    for (int i = 1; i < nu - 1; ++i)
      for (int j = 1; j < nv - 1; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * nv + j;
        const double ax = diag[k] * x[k] + cu * (x[k + nv] + x[k - nv]) + cv * (x[k + 1] + x[k - 1]);
        r = std::max(r, std::abs(ax - rhs[k]));
      }
    return r;
  };
  double r = linear_residual();
  for (int sweep = 1; sweep <= max_sweeps && r > target; ++sweep) {
    for (int color = 0; color < 2; ++color) {
      for (int i = 1; i < nu - 1; ++i) {
        for (int j = 1 + ((i + color) & 1); j < nv - 1; j += 2) {
          const std::size_t k = static_cast<std::size_t>(i) * nv + j;
          const double off = cu * (x[k + nv] + x[k - nv]) + cv * (x[k + 1] + x[k - 1]);
          const double gs_value = (rhs[k] - off) / diag[k];
          x[k] += omega * (gs_value - x[k]);
        }
      }
    }
    if (sweep % 10 == 0) r = linear_residual();
  }
  return linear_residual();
}

}  // namespace

GridSolution solve_sinh_gordon(const Domain& domain, int nu, int nv, const BoundaryFn& boundary,
                               const std::vector<double>* init, const SolverOptions& opts, const std::string& label) {
  if (nu < 16 || nv < 16) throw UsageError("sinh-Gordon grid must be at least 16 x 16");
  if (!(domain.u1 > domain.u0 && domain.v1 > domain.v0)) throw UsageError("empty sinh-Gordon domain");
  GridSolution gs;
  gs.nu = nu;
  gs.nv = nv;
  gs.u0 = domain.u0;
  gs.v0 = domain.v0;
  gs.du = (domain.u1 - domain.u0) / (nu - 1);
  gs.dv = (domain.v1 - domain.v0) / (nv - 1);
  gs.boundary = label;
  gs.h.assign(static_cast<std::size_t>(nu) * nv, 0.0);
  if (init) {
    if (init->size() != gs.h.size()) throw UsageError("initial guess has the wrong size");
    gs.h = *init;
  }
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      if (i == 0 || j == 0 || i == nu - 1 || j == nv - 1) {
        const double b = boundary(gs.u(i), gs.v(j));
        if (!std::isfinite(b)) throw UsageError("boundary data must be finite");
        gs.at(i, j) = b;
      }
    }

  const double omega =
      opts.omega > 0.0 ? opts.omega : 2.0 / (1.0 + std::sin(kPi / static_cast<double>(std::max(nu, nv) - 1)));
  std::vector<double> trace;
  double r = max_residual(gs);
  trace.push_back(r);
  int growth = 0;
  std::vector<double> rhs(gs.h.size()), delta(gs.h.size());
  for (int iter = 0; iter < opts.max_iter && r > opts.tol; ++iter) {
    for (int i = 1; i < nu - 1; ++i)
      for (int j = 1; j < nv - 1; ++j) rhs[static_cast<std::size_t>(i) * nv + j] = -residual_at(gs, i, j);
    std::fill(delta.begin(), delta.end(), 0.0);
    sor_solve(gs, rhs, delta, omega, std::max(opts.inner_reduction * r, 0.1 * opts.tol), opts.max_sweeps);

    GridSolution trial = gs;
    double lambda = 1.0;
    double r_trial = 0.0;
    for (int halving = 0; halving <= opts.max_halvings; ++halving) {
      for (std::size_t k = 0; k < gs.h.size(); ++k) trial.h[k] = gs.h[k] + lambda * delta[k];
      r_trial = max_residual(trial);
      if (r_trial < r) break;
      lambda *= 0.5;
    }
    growth = r_trial < r ? 0 : growth + 1;
    gs.h.swap(trial.h);
    r = r_trial;
    trace.push_back(r);
    if (!std::isfinite(r) || growth >= opts.divergence_window) {
      gs.residual = r;
      throw NonconvergenceError(fmt::format("sinh-Gordon solver diverged (residual {:.3e})", r), gs, trace);
    }
  }
  gs.residual = r;
  if (!(r <= opts.tol)) {
    throw NonconvergenceError(
        fmt::format("sinh-Gordon solver stopped after {} iterations with residual {:.3e}", opts.max_iter, r), gs,
        trace);
  }
  return gs;
}

double soliton_profile(double u) {
  // y = (H, H'), H'' = -(1/sqrt 2) sinh(sqrt 2 H).
  const int steps = std::max(1, static_cast<int>(std::ceil(std::abs(u) / 1e-4)));
  const double dt = u / steps;
  double y0 = 0.5, y1 = 0.0;
  auto f1 = [](double h) { return -nonlinearity(h); };
  for (int n = 0; n < steps; ++n) {
    const double k1a = y1, k1b = f1(y0);
    const double k2a = y1 + 0.5 * dt * k1b, k2b = f1(y0 + 0.5 * dt * k1a);
    const double k3a = y1 + 0.5 * dt * k2b, k3b = f1(y0 + 0.5 * dt * k2a);
    const double k4a = y1 + dt * k3b, k4b = f1(y0 + dt * k3a);
    y0 += dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
    y1 += dt / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
  }
  return y0;
}

BoundaryFn zero_boundary() {
  return [](double, double) { return 0.0; };
}

BoundaryFn soliton_boundary() {
  return [](double u, double) { return soliton_profile(u); };
}

// ---------------------------------------------------------------------------
// Interpolation

namespace {

struct Cell {
  int i, j;
  double fu, fv;
};

Cell locate(const GridSolution& gs, double u, double v, int margin) {
  const double x = (u - gs.u0) / gs.du;
  const double y = (v - gs.v0) / gs.dv;
  const double tiny = 1e-9;
  if (x < margin - tiny || x > gs.nu - 1 - margin + tiny || y < margin - tiny || y > gs.nv - 1 - margin + tiny) {
    throw DomainError(fmt::format("({}, {}) is outside the grid interior (margin {} nodes)", u, v, margin));
  }
  int i = std::clamp(static_cast<int>(std::floor(x)), margin, gs.nu - 2 - margin);
  int j = std::clamp(static_cast<int>(std::floor(y)), margin, gs.nv - 2 - margin);
  return Cell{i, j, x - i, y - j};
}

double node_hu(const GridSolution& gs, int i, int j) { return (gs.at(i + 1, j) - gs.at(i - 1, j)) / (2.0 * gs.du); }
double node_hv(const GridSolution& gs, int i, int j) { return (gs.at(i, j + 1) - gs.at(i, j - 1)) / (2.0 * gs.dv); }

template <class F>
double bilinear(const Cell& c, F&& node) {
  return (1.0 - c.fu) * (1.0 - c.fv) * node(c.i, c.j) + c.fu * (1.0 - c.fv) * node(c.i + 1, c.j) +
         (1.0 - c.fu) * c.fv * node(c.i, c.j + 1) + c.fu * c.fv * node(c.i + 1, c.j + 1);
}

}  // namespace

double interpolate_h(const GridSolution& gs, double u, double v) {
  require_grid(gs);
  const Cell c = locate(gs, u, v, 0);
  return bilinear(c, [&](int i, int j) { return gs.at(i, j); });
}

Eigen::Vector2d interpolate_gradient(const GridSolution& gs, double u, double v) {
  require_grid(gs);
  const Cell c = locate(gs, u, v, 1);
  return {bilinear(c, [&](int i, int j) { return node_hu(gs, i, j); }),
          bilinear(c, [&](int i, int j) { return node_hv(gs, i, j); })};
}

// ---------------------------------------------------------------------------
// Closed forms

BFields b_fields(double h, double t) {
  const double ct = std::cos(t * kInvSqrt2), st = std::sin(t * kInvSqrt2);
  const double ch = std::cosh(h * kInvSqrt2), sh = std::sinh(h * kInvSqrt2);
  const double den = ct * ct + sh * sh;
  if (den < kExclusion) {
    throw ExcludedSetError(fmt::format("(h, t) = ({}, {}) is too close to the excluded set", h, t));
  }
  BFields b;
  b.b1 = kInvSqrt2 * st * ct / den;
  b.b2 = kInvSqrt2 * sh * ch / den;
  b.b4 = -b.b1;
  return b;
}

BFields b_fields(const GridSolution& gs, double u, double v, double t) { return b_fields(interpolate_h(gs, u, v), t); }

IntrinsicData intrinsic_data(double h, double hu, double hv, double t) {
  const double c2 = std::cos(kSqrt2 * t), s2 = std::sin(kSqrt2 * t);
  const double ch2 = std::cosh(kSqrt2 * h), sh2 = std::sinh(kSqrt2 * h);
  const double sum = c2 + ch2;
  if (0.5 * sum < kExclusion) {
    throw ExcludedSetError(fmt::format("(h, t) = ({}, {}) is too close to the excluded set", h, t));
  }
  IntrinsicData d;
  d.hu = hu;
  d.hv = hv;
  const double a = 0.5 * sum;
  d.g3 << a + hv * hv, -hu * hv, hv,
          -hu * hv, a + hu * hu, -hu,
          hv, -hu, 1.0;

  const double alpha = ch2 * s2 / (kSqrt2 * sum);
  const double beta = c2 * sh2 / (kSqrt2 * sum);
  d.A3.col(0) << alpha, beta, -(alpha * hv - beta * hu);
  d.A3.col(1) << beta, -alpha, -(beta * hv + alpha * hu);
  d.A3.col(2).setZero();

  const double p1 = (1.0 + c2 * ch2) / sum;
  const double p2 = s2 * sh2 / sum;
  d.P4.col(0) << p1, -p2, -(hv * p1 + hu * p2), hv;
  d.P4.col(1) << -p2, -p1, -(hu * p1 - hv * p2), -hu;
  d.P4.col(2) << 0.0, 0.0, 0.0, 1.0;
  d.P4.col(3) << 0.0, 0.0, 1.0, 0.0;
  return d;
}

IntrinsicData intrinsic_data(const GridSolution& gs, double u, double v, double t) {
  const Eigen::Vector2d grad = interpolate_gradient(gs, u, v);
  return intrinsic_data(interpolate_h(gs, u, v), grad[0], grad[1], t);
}

AdaptedFrame adapted_frame(double h, double hu, double hv, double t) {
  const double ct = std::cos(t * kInvSqrt2), st = std::sin(t * kInvSqrt2);
  const double ch = std::cosh(h * kInvSqrt2), sh = std::sinh(h * kInvSqrt2);
  const double den = std::cos(kSqrt2 * t) + std::cosh(kSqrt2 * h);
  if (0.5 * den < kExclusion) {
    throw ExcludedSetError(fmt::format("(h, t) = ({}, {}) is too close to the excluded set", h, t));
  }
  AdaptedFrame f;
  f.a1 = ct * ch;
  f.a2 = st * sh;
  f.d1 = 2.0 * (ct * ch * hv + st * sh * hu) / den;
  f.d2 = 2.0 * (st * sh * hv - ct * ch * hu) / den;
  const double s = f.a1 * f.a1 + f.a2 * f.a2;
  f.E.col(0) << f.a1 / s, -f.a2 / s, -f.d1;
  f.E.col(1) << f.a2 / s, f.a1 / s, -f.d2;
  f.E.col(2) << 0.0, 0.0, 1.0;
  return f;
}

double coordinate_relation_residual(double h, double t) {
  const BFields b = b_fields(h, t);
  const AdaptedFrame f = adapted_frame(h, 0.0, 0.0, t);
  const std::complex<double> a(f.a1, f.a2);
  const std::complex<double> z(b.b1, -b.b2);
  return std::abs(a * a * (2.0 * z * z + 1.0) - 1.0);
}

// ---------------------------------------------------------------------------
// Node residuals

namespace {

// Packed node quantities: E (9, column-major), b1, b2, b4, a1, a2, d1, d2.
using Packed = Eigen::Matrix<double, 16, 1>;

Packed pack(double h, double hu, double hv, double t) {
  const AdaptedFrame f = adapted_frame(h, hu, hv, t);
  const BFields b = b_fields(h, t);
  Packed p;
  p.head<9>() = Eigen::Map<const Eigen::Matrix<double, 9, 1>>(f.E.data());
  p.tail<7>() << b.b1, b.b2, b.b4, f.a1, f.a2, f.d1, f.d2;
  return p;
}

Packed pack_node(const GridSolution& gs, int i, int j, double t) {
  return pack(gs.at(i, j), node_hu(gs, i, j), node_hv(gs, i, j), t);
}

}  // namespace

NodeResiduals node_residuals(const GridSolution& gs, int i, int j, double t) {
  require_grid(gs);
  if (i < 2 || j < 2 || i > gs.nu - 3 || j > gs.nv - 3) throw DomainError("node is too close to the grid edge");
  const Packed q = pack_node(gs, i, j, t);
  std::array<Packed, 3> dq;
  dq[0] = (pack_node(gs, i + 1, j, t) - pack_node(gs, i - 1, j, t)) / (2.0 * gs.du);
  dq[1] = (pack_node(gs, i, j + 1, t) - pack_node(gs, i, j - 1, t)) / (2.0 * gs.dv);
  {
    // Fourth-order central difference in t.
    const double dt = 1e-3;
    dq[2] = (-pack_node(gs, i, j, t + 2 * dt) + 8.0 * pack_node(gs, i, j, t + dt) - 8.0 * pack_node(gs, i, j, t - dt) +
             pack_node(gs, i, j, t - 2 * dt)) /
            (12.0 * dt);
  }
  const Mat3 E = Eigen::Map<const Mat3>(q.data());
  // Derivative of packed entry k along frame vector a.
  auto along = [&](int a, int k) { return E(0, a) * dq[0][k] + E(1, a) * dq[1][k] + E(2, a) * dq[2][k]; };
  auto bracket = [&](int a, int b) {
    Vec3 out;
    for (int m = 0; m < 3; ++m) out[m] = along(a, 3 * b + m) - along(b, 3 * a + m);
    return out;
  };
  const double b1 = q[9], b2 = q[10], b4 = q[11];
  const double a1 = q[12], a2 = q[13], d1 = q[14], d2 = q[15];
  enum { B1 = 9, B2 = 10, B4 = 11, A1 = 12, A2 = 13, D1 = 14, D2 = 15 };

  const double h = gs.at(i, j);
  const IntrinsicData g = intrinsic_data(h, node_hu(gs, i, j), node_hv(gs, i, j), t);
  auto g_norm = [&](const Vec3& w) { return std::sqrt(std::max(0.0, w.dot(g.g3 * w))); };

  NodeResiduals out;
  double e = 0.0;
  e = std::max(e, std::abs(along(2, B1) - (0.5 + b1 * b1 - b2 * b2)));
  e = std::max(e, std::abs(along(2, B2) - 2.0 * b1 * b2));
  e = std::max(e, std::abs(along(2, B4) - (-0.5 + b2 * b2 - b4 * b4)));
  e = std::max(e, std::abs(along(0, B2) - along(1, B1)));
  e = std::max(e, std::abs(along(0, B4) - along(1, B2)));
  e = std::max(e, std::abs(b1 + b4));
  const Vec3 br12 = bracket(0, 1) + 2.0 * b2 * E.col(2);
  const Vec3 br13 = bracket(0, 2) - (-b1 * E.col(0) + b2 * E.col(1));
  const Vec3 br23 = bracket(1, 2) - (-b2 * E.col(0) - b1 * E.col(1));
  e = std::max({e, g_norm(br12), g_norm(br13), g_norm(br23)});
  e = std::max(e, (E.transpose() * g.g3 * E - Mat3::Identity()).cwiseAbs().maxCoeff());
  out.frame_system = e;

  const double a = 0.5 * (std::cos(kSqrt2 * t) + std::cosh(kSqrt2 * h));
  out.bracket_vs_pde = std::abs(a * br12[2] - residual_at(gs, i, j));

  double fl = 0.0;
  fl = std::max(fl, std::abs(along(2, A1) - (-a1 * b1 - a2 * b2)));
  fl = std::max(fl, std::abs(along(2, A2) - (a1 * b2 - a2 * b1)));
  fl = std::max(fl, std::abs(along(0, A2) + along(1, A1)));
  fl = std::max(fl, std::abs(along(0, A1) - along(1, A2)));
  fl = std::max(fl, std::abs(along(2, D1) - (b1 * d1 - b2 * d2)));
  fl = std::max(fl, std::abs(along(2, D2) - (b1 * d2 + b2 * d1)));
  fl = std::max(fl, std::abs(along(0, D2) - along(1, D1) - 2.0 * b2));
  out.flatness = fl;
  return out;
}

// ---------------------------------------------------------------------------
// Check suite

namespace {

CheckReport grid_report(const std::string& name, double value, double tol, std::size_t samples,
                        const GridSolution& gs, std::uint64_t seed) {
  CheckReport r;
  r.name = name;
  r.max_residual = value;
  r.tolerance = tol;
  r.samples = samples;
  r.metadata["boundary"] = gs.boundary;
  r.metadata["grid"] = fmt::format("{}x{}", gs.nu, gs.nv);
  r.metadata["seed"] = fmt::format("{}", seed);
  r.metadata["pde_residual"] = fmt::format("{:.17g}", gs.residual);
  r.finalize();
  return r;
}

std::vector<double> seeded_times(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> ts;
  for (std::size_t k = 0; k < n; ++k) ts.push_back(dist(rng));
  return ts;
}

struct NodeScan {
  double worst_e = 0.0, worst_f = 0.0, worst_flat = 0.0;
  int ie = 0, je = 0;
  double te = 0.0;
  std::size_t count = 0;
};

NodeScan scan_nodes(const GridSolution& gs, const std::vector<double>& ts) {
  struct Row {
    double e = 0.0, f = 0.0, flat = 0.0;
    int je = 0;
    double te = 0.0;
    std::size_t count = 0;
  };
  const int rows = gs.nu - 4;
  auto per_row = parallel_map(static_cast<std::size_t>(std::max(rows, 0)), [&](std::size_t r) {
    Row row;
    const int i = static_cast<int>(r) + 2;
    for (int j = 2; j < gs.nv - 2; ++j)
      for (double t : ts) {
        NodeResiduals nr;
        try {
          nr = node_residuals(gs, i, j, t);
        } catch (const ExcludedSetError&) {
          continue;
        }
        ++row.count;
        if (!(nr.frame_system <= row.e)) {
          row.e = nr.frame_system;
          row.je = j;
          row.te = t;
        }
        row.f = std::max(row.f, nr.bracket_vs_pde);
        row.flat = std::max(row.flat, nr.flatness);
      }
    return row;
  });
  NodeScan s;
  for (std::size_t r = 0; r < per_row.size(); ++r) {
    const Row& row = per_row[r];
    s.count += row.count;
    if (!(row.e <= s.worst_e)) {
      s.worst_e = row.e;
      s.ie = static_cast<int>(r) + 2;
      s.je = row.je;
      s.te = row.te;
    }
    s.worst_f = std::max(s.worst_f, row.f);
    s.worst_flat = std::max(s.worst_flat, row.flat);
  }
  return s;
}

}  // namespace

std::vector<CheckReport> intrinsic_checks(const GridSolution& gs, std::size_t n_samples, std::uint64_t seed) {
  require_grid(gs);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  struct Sample {
    double u, v, t;
  };
  std::vector<Sample> samples;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double u = gs.u(1) + uni(rng) * (gs.nu - 3) * gs.du;
    const double v = gs.v(1) + uni(rng) * (gs.nv - 3) * gs.dv;
    const double t = -1.0 + 2.0 * uni(rng);
    samples.push_back({u, v, t});
  }
  double ra = 0.0, rb = 0.0, rc = 0.0, rd = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  for (const Sample& s : samples) {
    IntrinsicData d;
    try {
      d = intrinsic_data(gs, s.u, s.v, s.t);
    } catch (const ExcludedSetError&) {
      continue;
    }
    ++used;
    const double h = interpolate_h(gs, s.u, s.v);
    const double a = 0.5 * (std::cos(kSqrt2 * s.t) + std::cosh(kSqrt2 * h));
    Eigen::SelfAdjointEigenSolver<Mat3> es(d.g3, Eigen::EigenvaluesOnly);
    const double lam = es.eigenvalues()[0];
    min_eig = std::min(min_eig, lam);
    double a_res = (d.g3 - d.g3.transpose()).cwiseAbs().maxCoeff();
    a_res = std::max(a_res, std::abs(d.g3.determinant() - a * a) / (a * a));
    if (!(lam > 0.0)) a_res = std::max(a_res, 1.0 + std::abs(lam));
    ra = std::max(ra, a_res);
    const Mat3 ga = d.g3 * d.A3;
    rb = std::max(rb, (ga - ga.transpose()).cwiseAbs().maxCoeff());
    rc = std::max(rc, std::abs(d.A3.trace()));
    Mat4 s4 = Mat4::Identity();
    s4.topLeftCorner<3, 3>() = d.g3;
    const Mat4 sp = s4 * d.P4;
    double d_res = (d.P4 * d.P4 - Mat4::Identity()).cwiseAbs().maxCoeff();
    d_res = std::max(d_res, (sp - sp.transpose()).cwiseAbs().maxCoeff());
    rd = std::max(rd, d_res);
  }
  const double tol = 1e-4;
  std::vector<CheckReport> out;
  CheckReport a = grid_report("sg_a_metric", ra, tol, used, gs, seed);
  a.metadata["min_eigenvalue"] = fmt::format("{:.17g}", min_eig);
  out.push_back(a);
  out.push_back(grid_report("sg_b_self_adjoint", rb, tol, used, gs, seed));
  out.push_back(grid_report("sg_c_minimal", rc, tol, used, gs, seed));
  out.push_back(grid_report("sg_d_product_structure", rd, tol, used, gs, seed));

  const std::vector<double> ts = seeded_times(rng, 3);
  const NodeScan scan = scan_nodes(gs, ts);
  CheckReport e = grid_report("sg_e_frame_system", scan.worst_e, tol, scan.count, gs, seed);
  e.metadata["worst_u"] = fmt::format("{:.17g}", gs.u(scan.ie));
  e.metadata["worst_v"] = fmt::format("{:.17g}", gs.v(scan.je));
  e.metadata["worst_t"] = fmt::format("{:.17g}", scan.te);
  e.metadata["worst_node"] = fmt::format("{},{}", scan.ie, scan.je);
  out.push_back(e);
  out.push_back(grid_report("sg_f_bracket_equals_pde", scan.worst_f, tol, scan.count, gs, seed));
  return out;
}

CheckReport coordinate_solution_check(const GridSolution& gs, std::size_t n_samples, std::uint64_t seed) {
  require_grid(gs);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double relation = 0.0;
  std::size_t used = 0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double u = gs.u0 + uni(rng) * (gs.nu - 1) * gs.du;
    const double v = gs.v0 + uni(rng) * (gs.nv - 1) * gs.dv;
    const double t = -1.0 + 2.0 * uni(rng);
    try {
      relation = std::max(relation, coordinate_relation_residual(interpolate_h(gs, u, v), t));
      ++used;
    } catch (const ExcludedSetError&) {
    }
  }
  const NodeScan scan = scan_nodes(gs, seeded_times(rng, 2));
  CheckReport r = grid_report("sg_adapted_coordinates", std::max(relation, scan.worst_flat), 1e-4, used + scan.count,
                              gs, seed);
  r.metadata["complex_square_residual"] = fmt::format("{:.17g}", relation);
  r.metadata["flatness_residual"] = fmt::format("{:.17g}", scan.worst_flat);
  return r;
}

// ---------------------------------------------------------------------------
// Archive

namespace {

std::string strip_extension(const std::string& path) {
  for (const char* ext : {".json", ".csv"}) {
    const std::string e(ext);
    if (path.size() > e.size() && path.compare(path.size() - e.size(), e.size(), e) == 0) {
      return path.substr(0, path.size() - e.size());
    }
  }
  return path;
}

std::string base_name(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string dir_name(const std::string& path) {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? std::string() : path.substr(0, slash + 1);
}

}  // namespace

void save_archive(const GridSolution& gs, const std::string& path) {
  require_grid(gs);
  const std::string stem = strip_extension(path);
  {
    std::ofstream csv(stem + ".csv");
    if (!csv) throw UsageError("cannot write " + stem + ".csv");
    csv << "u,v,h\n";
    for (int i = 0; i < gs.nu; ++i)
      for (int j = 0; j < gs.nv; ++j) csv << fmt::format("{:.17g},{:.17g},{:.17g}\n", gs.u(i), gs.v(j), gs.at(i, j));
  }
  std::ofstream js(stem + ".json");
  if (!js) throw UsageError("cannot write " + stem + ".json");
  js << "{\n"
     << fmt::format("  \"schema\": 1,\n  \"nu\": {},\n  \"nv\": {},\n", gs.nu, gs.nv)
     << fmt::format("  \"u0\": {:.17g},\n  \"v0\": {:.17g},\n  \"du\": {:.17g},\n  \"dv\": {:.17g},\n", gs.u0, gs.v0,
                    gs.du, gs.dv)
     << fmt::format("  \"residual\": {:.17g},\n", gs.residual)
     << "  \"boundary\": " << nlohmann::json(gs.boundary).dump() << ",\n"
     << "  \"data\": " << nlohmann::json(base_name(stem) + ".csv").dump() << "\n}\n";
}

GridSolution load_archive(const std::string& path) {
  const std::string stem = strip_extension(path);
  std::ifstream js(stem + ".json");
  if (!js) throw UsageError("cannot open archive header " + stem + ".json");
  nlohmann::json header;
  try {
    js >> header;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed archive header: ") + e.what());
  }
  GridSolution gs;
  try {
    gs.nu = header.at("nu").get<int>();
    gs.nv = header.at("nv").get<int>();
    gs.u0 = header.at("u0").get<double>();
    gs.v0 = header.at("v0").get<double>();
    gs.du = header.at("du").get<double>();
    gs.dv = header.at("dv").get<double>();
    gs.residual = header.value("residual", 0.0);
    gs.boundary = header.value("boundary", std::string("custom"));
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed archive header: ") + e.what());
  }
  const std::string data = dir_name(stem) + header.value("data", base_name(stem) + ".csv");
  std::ifstream csv(data);
  if (!csv) throw UsageError("cannot open archive data " + data);
  std::string line;
  std::getline(csv, line);
  gs.h.assign(static_cast<std::size_t>(gs.nu) * gs.nv, 0.0);
  // Rows are u,v,h in node order; u and v must sit on the grid of the header.
  auto field = [&line](const char*& at, char stop) {
    char* end = nullptr;
    const double x = std::strtod(at, &end);
    if (end == at || *end != stop) throw UsageError("malformed archive row: " + line);
    at = end + (stop ? 1 : 0);
    return x;
  };
  std::size_t k = 0;
  while (std::getline(csv, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (k >= gs.h.size()) throw UsageError("archive data has too many rows");
    const char* at = line.c_str();
    const double u = field(at, ','), v = field(at, ','), h = field(at, '\0');
    const int i = static_cast<int>(k / gs.nv), j = static_cast<int>(k % gs.nv);
    if (std::abs(u - gs.u(i)) > 1e-9 * (1.0 + std::abs(u)) || std::abs(v - gs.v(j)) > 1e-9 * (1.0 + std::abs(v)) ||
        !std::isfinite(h)) {
      throw UsageError("archive row does not match the grid: " + line);
    }
    gs.h[k++] = h;
  }
  if (k != gs.h.size()) throw UsageError("archive data has the wrong number of rows");
  require_grid(gs);
  return gs;
}

}  // namespace prodgeom
