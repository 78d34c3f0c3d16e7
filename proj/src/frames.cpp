#include "prodgeom/frames.hpp"

#include <fmt/format.h>

#include <cmath>

namespace prodgeom {

Vec6 chart_normal(const AmbientPoint& x, const std::array<Vec6, 3>& d1) {
  Mat6x3 d;
  for (int i = 0; i < 3; ++i) d.col(i) = d1[i];
  const double gram = (d.transpose() * d).determinant();
  if (!(gram > default_tolerances().gram_min)) {
    throw SingularChartError(fmt::format("chart partials are degenerate (Gram determinant {:.3e})", gram));
  }
  const Eigen::Matrix<double, 6, 4> basis = raw::tangent_basis(x);
  const Eigen::Matrix<double, 4, 3> m = basis.transpose() * d;
  Eigen::HouseholderQR<Eigen::Matrix<double, 4, 3>> qr(m);
  const Eigen::Matrix4d q = qr.householderQ();
  Vec6 n = basis * q.col(3);
  n.normalize();

  Eigen::Matrix<double, 6, 6> frame;
  frame.col(0) = raw::stack(x.p, Vec3::Zero());
  frame.col(1) = raw::stack(Vec3::Zero(), x.q);
  frame.block<6, 3>(0, 2) = d;
  frame.col(5) = n;
  if (frame.determinant() < 0.0) n = -n;
  return n;
}

AmbientTangent unit_normal(const Jet2& j, int orientation) {
  const Vec6 n = chart_normal(j.point, j.d1);
  return AmbientTangent{j.point, orientation < 0 ? Vec3(-n.head<3>()) : Vec3(n.head<3>()),
                        orientation < 0 ? Vec3(-n.tail<3>()) : Vec3(n.tail<3>())};
}

namespace {

Vec6 oriented_normal(const Jet2& j, int orientation) {
  const Vec6 n = chart_normal(j.point, j.d1);
  return orientation < 0 ? Vec6(-n) : n;
}

// Symmetric second fundamental form h_ij = <d_i d_j x, N>.
Mat3 second_form(const Jet2& j, const Vec6& n) {
  Mat3 h;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) h(a, b) = j.second(a, b).dot(n);
  }
  return h;
}

}  // namespace

FrameData build_frame(const Jet2& j, int orientation, const FrameTolerance& tol) {
  FrameData f;
  f.point = j.point;
  const Vec6 n = oriented_normal(j, orientation);
  const Mat6x3 d = j.d1_matrix();
  for (int i = 0; i < 3; ++i) f.tangent[i] = AmbientTangent{j.point, d.col(i).head<3>(), d.col(i).tail<3>()};
  f.N = AmbientTangent{j.point, n.head<3>(), n.tail<3>()};

  const Vec6 pn = raw::apply_P(n);
  f.C = pn.dot(n);
  const Vec6 x = pn - f.C * n;
  f.X = AmbientTangent{j.point, x.head<3>(), x.tail<3>()};

  f.G = d.transpose() * d;
  const Mat3 g_inv = f.G.inverse();

  Mat6x3 e;
  const double c2 = f.C * f.C;
  f.has_E = c2 < 1.0 - tol.c_degenerate;
  if (f.has_E) {
    // J1 N + J2 N = (2 p x N_p, 0), J1 N - J2 N = (0, 2 q x N_q).
    e.col(0) = raw::stack(2.0 * j.point.p.cross(n.head<3>()), Vec3::Zero()) / std::sqrt(2.0 * (1.0 + f.C));
    e.col(1) = raw::stack(Vec3::Zero(), 2.0 * j.point.q.cross(n.tail<3>())) / std::sqrt(2.0 * (1.0 - f.C));
    e.col(2) = x / std::sqrt(1.0 - c2);
  } else {
    Eigen::HouseholderQR<Mat6x3> qr(d);
    e = qr.householderQ() * Mat6x3::Identity();
  }
  for (int a = 0; a < 3; ++a) f.E[a] = AmbientTangent{j.point, e.col(a).head<3>(), e.col(a).tail<3>()};

  // Chart coordinates of the frame vectors (they lie in the span of the partials).
  f.frame_coeff = g_inv * d.transpose() * e;

  for (int a = 0; a < 3; ++a) {
    const Vec6 pe = raw::apply_P(e.col(a));
    for (int b = 0; b < 3; ++b) f.T(b, a) = pe.dot(e.col(b));
    f.mu[a] = pe.dot(n);
  }

  const Mat3 h = second_form(j, n);
  f.b_matrix = f.frame_coeff.transpose() * h * f.frame_coeff;
  f.b = {f.b_matrix(0, 0), f.b_matrix(0, 1), f.b_matrix(0, 2),
         f.b_matrix(1, 1), f.b_matrix(1, 2), f.b_matrix(2, 2)};
  return f;
}

namespace {

int orientation_for(const Immersion& im, const Vec3& s, const Jet2& j) {
  return im.has_normal_hint() ? im.orientation_at(s, chart_normal(j.point, j.d1)) : im.orientation();
}

}  // namespace

FrameData build_frame(const Immersion& im, const Vec3& s, const FrameTolerance& tol) {
  const Jet2 j = jet(im, s);
  return build_frame(j, orientation_for(im, s, j), tol);
}

PointTensors FrameData::tensors() const {
  PointTensors t;
  t.A = 0.5 * (b_matrix + b_matrix.transpose());
  t.T = 0.5 * (T + T.transpose());
  for (int a = 0; a < 3; ++a) t.X[a] = metric_g(X, E[a]);
  t.mu = mu;
  t.C = C;
  return t;
}

ChartTensors chart_tensors(const Jet2& j, int orientation) {
  ChartTensors c;
  const Vec6 n = oriented_normal(j, orientation);
  const Mat6x3 d = j.d1_matrix();
  c.G = d.transpose() * d;
  const Mat3 g_inv = c.G.inverse();
  c.A = g_inv * second_form(j, n);
  Mat6x3 pd = d;
  pd.bottomRows<3>() *= -1.0;
  c.T = g_inv * d.transpose() * pd;
  c.mu = pd.transpose() * n;
  const Vec6 pn = raw::apply_P(n);
  c.C = pn.dot(n);
  c.X = g_inv * d.transpose() * pn;
  return c;
}

ChartTensors chart_tensors(const Immersion& im, const Vec3& s) {
  const Jet2 j = jet(im, s);
  return chart_tensors(j, orientation_for(im, s, j));
}

Mat3 weingarten_from_normal_field(const Immersion& im, const Vec3& s) {
  const double h = im.fd_step();
  AmbientPoint x;
  const auto d1 = first_partials(im, s, &x);
  auto normal_at = [&](const Vec3& where) {
    AmbientPoint y;
    const auto dd = first_partials(im, where, &y);
    const Vec6 n = chart_normal(y, dd);
    return im.orientation_at(where, n) < 0 ? Vec6(-n) : n;
  };
  Mat3 w;
  for (int i = 0; i < 3; ++i) {
    const Vec3 e = h * Vec3::Unit(i);
    const Vec6 dn = (normal_at(s + e) - normal_at(s - e)) / (2.0 * h);
    for (int k = 0; k < 3; ++k) w(k, i) = -dn.dot(d1[k]);
  }
  return w;
}

double mean_curvature(const PointTensors& t) { return t.A.trace() / 3.0; }

double mean_curvature(const FrameData& f) { return (f.b[0] + f.b[3] + f.b[5]) / 3.0; }

Vec3 principal_curvatures(const PointTensors& t) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (t.A + t.A.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Vec3 principal_curvatures(const FrameData& f) { return principal_curvatures(f.tensors()); }

}  // namespace prodgeom
