#include "stbem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stbem {

namespace {

double det3(const Eigen::Matrix3d& m) { return m.determinant(); }

}  // namespace

Vec4 cross4(const Vec4& a, const Vec4& b, const Vec4& c) {
  Eigen::Matrix<double, 3, 4> m;
  m.row(0) = a.transpose();
  m.row(1) = b.transpose();
  m.row(2) = c.transpose();
  Vec4 n;
  for (int i = 0; i < 4; ++i) {
    Eigen::Matrix3d minor;
    int col = 0;
    for (int j = 0; j < 4; ++j) {
      if (j == i) continue;
      minor.col(col++) = m.col(j);
    }
    // cofactor of entry (3, i) in the 4x4 matrix [a; b; c; n]
    n[i] = ((3 + i) % 2 == 0 ? 1.0 : -1.0) * det3(minor);
  }
  return n;
}

double kernel_eval(KernelId k, const Vec3& x, const Vec3& y, const Vec3& n) {
  const Vec3 d = x - y;
  const double r = d.norm();
  if (r == 0.0) throw GeometryError("kernel_eval: coincident points");
  const double c = 1.0 / (4.0 * std::numbers::pi);
  switch (k) {
    case KernelId::K1:
      return c / r;
    case KernelId::K2:
      return c * n.dot(d) / (r * r);
    case KernelId::K3:
      return c * n.dot(d) / (r * r * r);
  }
  throw GeometryError("kernel_eval: unknown kernel");
}

double Panel::min_time() const {
  double m = vertices[0][0];
  for (const auto& v : vertices) m = std::min(m, v[0]);
  return m;
}

double Panel::max_time() const {
  double m = vertices[0][0];
  for (const auto& v : vertices) m = std::max(m, v[0]);
  return m;
}

Vec4 Panel::centroid() const {
  return 0.25 * (vertices[0] + vertices[1] + vertices[2] + vertices[3]);
}

std::array<double, 4> Panel::barycentric(const Vec4& p) const {
  std::array<double, 4> lam{};
  const Vec4 d = p - vertices[0];
  double s = 0.0;
  for (int k = 1; k < 4; ++k) {
    lam[k] = bary_grad_.row(k).dot(d);
    s += lam[k];
  }
  lam[0] = 1.0 - s;
  return lam;
}

double Panel::phi_sigma(const Vec4& y) const {
  double m = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    const Vec4& anchor = vertices[faces[i].vertices[0]];
    m = std::max(m, (y - anchor).dot(faces[i].conormal));
  }
  return m;
}

Panel panel_from_vertices(const std::array<Vec4, 4>& v) {
  Panel p;
  p.vertices = v;

  Eigen::Matrix<double, 4, 3> e;
  for (int k = 0; k < 3; ++k) e.col(k) = v[k + 1] - v[0];

  double longest = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) longest = std::max(longest, (v[i] - v[j]).norm());
  p.diameter_ = longest;

  const Eigen::Matrix3d gram = e.transpose() * e;
  const double gdet = gram.determinant();
  p.volume_ = gdet > 0.0 ? std::sqrt(gdet) / 6.0 : 0.0;
  if (longest == 0.0 || p.volume_ <= 1e-14 * longest * longest * longest)
    throw GeometryError("panel_from_vertices: degenerate tetrahedron");

  Vec4 n = cross4(e.col(0), e.col(1), e.col(2));
  const double full = n.norm();
  n[0] = 0.0;
  const double spatial = n.norm();
  if (spatial <= 1e-12 * full)
    throw GeometryError("panel_from_vertices: panel normal is time-like");
  p.normal = -n / spatial;

  // barycentric gradients: rows of the pseudo-inverse of e
  const Eigen::Matrix<double, 3, 4> pinv = gram.inverse() * e.transpose();
  p.bary_grad_.setZero();
  for (int k = 1; k < 4; ++k) p.bary_grad_.row(k) = pinv.row(k - 1);
  p.bary_grad_.row(0) = -(pinv.row(0) + pinv.row(1) + pinv.row(2));

  for (int i = 0; i < 4; ++i) {
    PanelFace& f = p.faces[i];
    int c = 0;
    for (int j = 0; j < 4; ++j)
      if (j != i) f.vertices[c++] = j;
    // outward conormal is minus the gradient of the opposite barycentric
    Vec4 g = -p.bary_grad_.row(i).transpose();
    f.conormal = g / g.norm();
  }
  return p;
}

double d_r(double alpha, double r) {
  if (alpha < r / std::numbers::sqrt2) return alpha + std::sqrt(r * r - alpha * alpha);
  return r * std::numbers::sqrt2;
}

ConeBallBounds cone_ball_bounds(const SpaceTimePoint& x, const Vec4& y, double r) {
  const Vec4 v = x.vec() - y;
  const Vec3 vx = v.tail<3>();
  const double alpha = vx.norm();
  const double phi = alpha - v[0];
  const double s = r / std::numbers::sqrt2;
  const Vec3 u = alpha > 0.0 ? Vec3(vx / alpha) : Vec3::UnitX();

  ConeBallBounds b;
  b.max = phi + r * std::numbers::sqrt2;
  b.argmax << y[0] + s, y.tail<3>() - s * u;
  b.min = phi - d_r(alpha, r);
  if (alpha >= s) {
    b.argmin << y[0] - s, y.tail<3>() + s * u;
  } else {
    b.argmin << y[0] - std::sqrt(r * r - alpha * alpha), x.x;
  }
  return b;
}

}  // namespace stbem
