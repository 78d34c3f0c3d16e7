#include "prodgeom/parallel.hpp"

#include "prodgeom/workers.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace prodgeom {

namespace {

constexpr double kFocal = 1e-10;

void require_regular(const ParallelParams& pp, double det) {
  if (!(std::abs(det) > kFocal)) {
    throw FocalPointError(fmt::format("focal point at r = {:.17g} (det B = {:.3e})", pp.r, det), pp.r);
  }
}

}  // namespace

std::pair<double, double> trig_sqrt2(double r) {
  const double x = kSqrt2 * r;
  const double k = std::round(x / (0.5 * kPi));
  if (std::abs(x - k * 0.5 * kPi) <= 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
    static constexpr double c[4] = {1.0, 0.0, -1.0, 0.0};
    static constexpr double s[4] = {0.0, 1.0, 0.0, -1.0};
    const long q = ((static_cast<long>(k) % 4) + 4) % 4;
    return {c[q], s[q]};
  }
  return {std::cos(x), std::sin(x)};
}

Mat3 B_matrix(const ParallelParams& pp) {
  const double c = std::cos(pp.r * kInvSqrt2), s = std::sin(pp.r * kInvSqrt2);
  Mat3 b;
  b << c - kSqrt2 * pp.b1 * s, -kSqrt2 * pp.b2 * s, 0.0,
       -kSqrt2 * pp.b2 * s, c - kSqrt2 * pp.b4 * s, 0.0,
       0.0, 0.0, 1.0;
  return b;
}

double det_B(const ParallelParams& pp) {
  const auto [c2, s2] = trig_sqrt2(pp.r);
  const double k = 2.0 * pp.b1 * pp.b4 - 2.0 * pp.b2 * pp.b2;
  return 0.5 * (1.0 + k + (1.0 - k) * c2 - kSqrt2 * (pp.b1 + pp.b4) * s2);
}

Mat3 D_matrix(const ParallelParams& pp) {
  const double c = std::cos(pp.r * kInvSqrt2), s = std::sin(pp.r * kInvSqrt2);
  Mat3 d;
  d << pp.b1 * c + kInvSqrt2 * s, pp.b2 * c, 0.0,
       pp.b2 * c, pp.b4 * c + kInvSqrt2 * s, 0.0,
       0.0, 0.0, 0.0;
  return d;
}

Mat3 A_r(const ParallelParams& pp) {
  const double det = det_B(pp);
  require_regular(pp, det);
  const auto [c2, s2] = trig_sqrt2(pp.r);
  const double b1 = pp.b1, b2 = pp.b2, b4 = pp.b4;
  const double m = 1.0 + 2.0 * b2 * b2 - 2.0 * b1 * b4;
  const double den = 2.0 * det;  // 1 - 2 b2^2 + 2 b1 b4 + m cos - sqrt2 (b1 + b4) sin
  Mat3 a = Mat3::Zero();
  a(0, 0) = (kSqrt2 * (b1 - b4 + (b1 + b4) * c2) + m * s2) / (kSqrt2 * den);
  a(1, 1) = (kSqrt2 * (-b1 + b4 + (b1 + b4) * c2) + m * s2) / (kSqrt2 * den);
  a(0, 1) = a(1, 0) = 2.0 * b2 / den;
  return a;
}

Mat3 A_r_jacobi(const ParallelParams& pp) {
  require_regular(pp, det_B(pp));
  return B_matrix(pp).partialPivLu().solve(D_matrix(pp));
}

double mean_curvature_r(const ParallelParams& pp) {
  const double rel = pp.b1 * pp.b4 - pp.b2 * pp.b2;
  if (std::abs(rel - 0.5) > 1e-6) {
    throw ContractError(fmt::format("H(r) needs b1 b4 - b2^2 = 1/2, got {:.17g}", rel));
  }
  require_regular(pp, det_B(pp));
  const auto [c2, s2] = trig_sqrt2(pp.r);
  const double t = pp.b1 + pp.b4;
  return 2.0 * t * c2 / (6.0 - 3.0 * kSqrt2 * t * s2) + 0.0;  // no negative zero
}

std::pair<double, double> parallel_ricci_minimal(double b1, double b2, double r) {
  const auto [c2, s2] = trig_sqrt2(r);
  (void)s2;
  const double s = b1 * b1 + b2 * b2;
  const double num = -1.0 + 2.0 * s;
  const double den = num - (1.0 + 2.0 * s) * c2;  // = -2 det B for b4 = -b1
  if (!(std::abs(den) > 2.0 * kFocal)) {
    throw FocalPointError(fmt::format("focal point at r = {:.17g}", r), r);
  }
  return {num / den, 1.0};
}

namespace {

Immersion parallel_or_focal(const Immersion& im, double r) {
  try {
    return parallel_immersion(im, r);
  } catch (const SingularChartError& e) {
    throw FocalPointError(fmt::format("parallel at r = {:.17g} is not an immersion: {}", r, e.what()), r);
  }
}

// Fourth-order central differences of the chart; the inner step stays well
// above the outer jet step so rounding noise in N is not amplified.
constexpr double kInnerStep = 2e-3;

Vec6 fourth_order_normal(const Immersion& im, const Vec3& s) {
  std::array<Vec6, 3> d;
  const double h = kInnerStep;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = h * Vec3::Unit(i);
    d[i] = (-im(s + 2 * e).stacked() + 8.0 * im(s + e).stacked() - 8.0 * im(s - e).stacked() +
            im(s - 2 * e).stacked()) /
           (12.0 * h);
  }
  const AmbientPoint x = im(s);
  const Vec6 n = chart_normal(x, d);
  return im.orientation_at(s, n) < 0 ? Vec6(-n) : n;
}

Vec3 parse_vec(const std::string& text) {
  Vec3 v;
  if (std::sscanf(text.c_str(), "[%lf, %lf, %lf]", &v[0], &v[1], &v[2]) != 3) {
    throw UsageError("cannot parse vector metadata '" + text + "'");
  }
  return v;
}

}  // namespace

Immersion parallel_immersion(const Immersion& im, double r) {
  auto eval = [im, r](const Vec3& s) {
    const AmbientPoint x = im(s);
    if (r == 0.0) return x;
    const Vec6 n = fourth_order_normal(im, s);
    return geodesic_exp(x, AmbientTangent::from_stacked(x, n), r);
  };
  const double margin = 2.5 * kInnerStep;
  ParamBox box = im.box();
  box.lo.array() += margin;
  box.hi.array() -= margin;
  Immersion out(im.name(), eval, box, im.fd_step());
  for (const auto& [k, v] : im.metadata()) out.set_metadata(k, v);
  out.set_metadata("parallel_r", fmt::format("{:.17g}", r));

  // The normal of the parallel is gamma'(r) at every point; past a focal set the
  // chart orientation flips while gamma'(r) does not.
  return out.with_normal_hint([im, r](const Vec3& s) {
    const AmbientPoint x = im(s);
    return geodesic_velocity(x, AmbientTangent::from_stacked(x, fourth_order_normal(im, s)), r).stacked();
  });
}

double hat_mab_membership(const AmbientPoint& x, const Vec3& a, const Vec3& b) {
  const double pa = x.p.dot(a), qb = x.q.dot(b);
  return std::abs(pa * pa + qb * qb - 1.0);
}

CheckReport membership_check(const Immersion& im, double r, const VerifyParams& params) {
  const auto& meta = im.metadata();
  if (!meta.count("a") || !meta.count("b")) throw UsageError("membership check needs family metadata a and b");
  const Vec3 a = parse_vec(meta.at("a")), b = parse_vec(meta.at("b"));
  const Immersion par = parallel_immersion(im, r);
  const auto samples = sample_params(par, params);
  const auto res = parallel_map(samples.size(), [&](std::size_t i) { return hat_mab_membership(par(samples[i]), a, b); });
  CheckReport rep;
  rep.name = "hat_mab_membership";
  rep.tolerance = 1e-8;
  rep.samples = res.size();
  for (double v : res) rep.max_residual = std::isnan(v) ? v : std::max(rep.max_residual, v);
  rep.metadata = meta;
  rep.metadata["seed"] = fmt::format("{}", params.seed);
  rep.metadata["parallel_r"] = fmt::format("{:.17g}", r);
  rep.finalize();
  return rep;
}

std::vector<CheckReport> theorem46_check(const Immersion& im, const VerifyParams& params, double r) {
  const auto probe = classification_probe(im, params, ProbeExpectations{});
  double spread = std::numeric_limits<double>::quiet_NaN();
  for (const auto& p : probe)
    if (p.name == "kappa_spread") spread = p.max_residual;
  if (!(spread < 1e-4)) {
    throw ContractError(fmt::format("{} is not of constant sectional curvature (kappa spread {:.3e})", im.name(), spread));
  }
  const Immersion par = parallel_or_focal(im, r);
  const auto samples = sample_params(par, params);
  struct Out {
    double H = 0.0, C = 0.0;
    bool skipped = false;
  };
  const auto outs = parallel_map(samples.size(), [&](std::size_t i) {
    Out o;
    try {
      const FrameData f = build_frame(par, samples[i]);
      o.H = std::abs(mean_curvature(f));
      o.C = std::abs(f.C);
    } catch (const SingularChartError&) {
      o.skipped = true;
    }
    return o;
  });
  CheckReport h, c;
  h.name = "theorem46_H";
  c.name = "theorem46_C";
  h.tolerance = 1e-4;
  c.tolerance = 1e-8;
  std::size_t skipped = 0;
  for (const Out& o : outs) {
    if (o.skipped) {
      ++skipped;
      continue;
    }
    ++h.samples;
    ++c.samples;
    h.max_residual = std::isnan(o.H) ? o.H : std::max(h.max_residual, o.H);
    c.max_residual = std::isnan(o.C) ? o.C : std::max(c.max_residual, o.C);
  }
  for (CheckReport* rep : {&h, &c}) {
    rep->metadata = im.metadata();
    rep->metadata["seed"] = fmt::format("{}", params.seed);
    rep->metadata["fd_step"] = fmt::format("{:.17g}", im.fd_step());
    rep->metadata["parallel_r"] = fmt::format("{:.17g}", r);
    rep->metadata["kappa_spread"] = fmt::format("{:.17g}", spread);
    rep->metadata["skipped"] = fmt::format("{}", skipped);
    if (rep->samples == 0) rep->max_residual = std::numeric_limits<double>::quiet_NaN();
    rep->finalize();
  }
  return {h, c};
}

std::vector<SweepRow> sweep(const Immersion& im, double r_min, double r_max, int steps, const VerifyParams& params) {
  if (steps < 1 || !(r_max >= r_min)) throw UsageError("sweep needs steps >= 1 and r_max >= r_min");
  std::vector<double> rs;
  for (int k = 0; k <= steps; ++k) rs.push_back(r_min + (r_max - r_min) * k / steps);
  if (kMinimalDistance > r_min && kMinimalDistance < r_max) {
    const bool present = std::any_of(rs.begin(), rs.end(), [](double r) { return std::abs(r - kMinimalDistance) < 1e-12; });
    if (!present) {
      rs.push_back(kMinimalDistance);
      std::sort(rs.begin(), rs.end());
    }
  }

  const auto samples = sample_params(parallel_immersion(im, 0.0), params);
  // Source shape entries, shared by every r.
  struct Source {
    ParallelParams pp;
    bool ok = false;
  };
  const auto sources = parallel_map(samples.size(), [&](std::size_t i) {
    Source s;
    try {
      const FrameData f = build_frame(im, samples[i]);
      s.pp.b1 = f.b[0];
      s.pp.b2 = f.b[1];
      s.pp.b4 = f.b[3];
      s.ok = true;
    } catch (const SingularChartError&) {
    }
    return s;
  });

  std::vector<SweepRow> rows;
  for (double r : rs) {
    SweepRow row;
    row.r = r;
    row.detB_min = std::numeric_limits<double>::infinity();
    for (const Source& s : sources) {
      if (!s.ok) continue;
      ParallelParams pp = s.pp;
      pp.r = r;
      const double det = std::abs(det_B(pp));
      row.detB_min = std::min(row.detB_min, det);
      require_regular(pp, det);
    }
    const Immersion par = parallel_or_focal(im, r);
    struct Out {
      double H = 0.0, C = 0.0;
      bool ok = false;
    };
    const auto outs = parallel_map(samples.size(), [&](std::size_t i) {
      Out o;
      try {
        const FrameData f = build_frame(par, samples[i]);
        o.H = mean_curvature(f);
        o.C = std::abs(f.C);
        o.ok = true;
      } catch (const SingularChartError&) {
      }
      return o;
    });
    std::size_t used = 0;
    for (const Out& o : outs) {
      if (!o.ok) continue;
      ++used;
      row.H_mean += o.H;
      row.H_max = std::max(row.H_max, std::abs(o.H));
      row.C_max = std::max(row.C_max, o.C);
    }
    if (used == 0) throw FocalPointError(fmt::format("parallel at r = {:.17g} is singular at every sample", r), r);
    row.H_mean /= static_cast<double>(used);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace prodgeom
