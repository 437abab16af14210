#include "stbem/oracles.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

namespace stbem {

namespace {

void check(const AppendixConfig& c) {
  if (!(c.t > 0.0) || !(c.eps > 0.0) || !(c.eps < c.t)) throw GeometryError("appendix: need 0 < eps < t");
  if (c.h < 0.0) throw GeometryError("appendix: negative panel scale");
}

double scale(const AppendixConfig& c) { return c.h > 0.0 ? c.h : 10.0 * c.t; }

}  // namespace

double appendix_closed_form(const AppendixConfig& c) {
  check(c);
  const double t = c.t, e = c.eps, s2 = std::numbers::sqrt2;
  if (c.which == AppendixCase::corner) {
    const double a = std::asin(s2 * e / (2.0 * t));
    return 2.0 * t * (std::numbers::pi / 4.0 - a) - s2 * e * std::log(s2 - 1.0) +
           s2 * e * std::log(s2 * (e / t) / (2.0 * (1.0 + std::sqrt(1.0 - e * e / (2.0 * t * t)))));
  }
  return 2.0 * t * (std::numbers::pi - std::acos(-e / t)) -
         2.0 * e * std::log((1.0 + std::sqrt(1.0 - e * e / (t * t))) / (e / t));
}

Panel appendix_panel(const AppendixConfig& c) {
  check(c);
  const double h = scale(c);
  return panel_from_vertices({Vec4(h, 0, 0, 0), Vec4(0, h, 0, 0), Vec4(0, 0, h, 0), Vec4(0, 0, 0, 0)});
}

SpaceTimePoint appendix_apex(const AppendixConfig& c) {
  check(c);
  if (c.which == AppendixCase::corner) {
    const double d = c.eps * std::numbers::sqrt2 / 2.0;
    return SpaceTimePoint(c.t, Vec3(-d, -d, 0.0));
  }
  return SpaceTimePoint(c.t, Vec3(-c.eps, scale(c) / 2.0, 0.0));
}

bool appendix_face4_inactive(const AppendixConfig& c, int samples) {
  const SpaceTimePoint x = appendix_apex(c);
  const double h = scale(c);
  // the slanted face is (tau + y1 + y2 - h) / sqrt(3) < 0
  for (int i = 0; i <= samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      const double rho = double(i) / samples;
      const double phi = 2.0 * std::numbers::pi * j / samples;
      const double tau = x.t - c.t * rho;
      const double y1 = x.x[0] - c.t * rho * std::cos(phi);
      const double y2 = x.x[1] - c.t * rho * std::sin(phi);
      const bool in_u0 = tau > 0.0 && y1 > 0.0 && y2 > 0.0;
      if (in_u0 && tau + y1 + y2 - h >= 0.0) return false;
    }
  }
  return true;
}

double brute_force_inner(const SpaceTimePoint& x, const Panel& p, KernelId k, const PanelDensity& w, int n_grid) {
  if (n_grid < 10) throw GeometryError("brute_force_inner: n_grid must be at least 10");
  const ConeFrame f = build_cone_frame(x, p);
  if (f.empty) return 0.0;
  double sum = 0.0;
  auto run = [&](Chart chart, double u0, double u1) {
    const double du = (u1 - u0) / n_grid;
    const double dphi = 2.0 * std::numbers::pi / n_grid;
    for (int i = 0; i < n_grid; ++i) {
      const double u = u0 + (i + 0.5) * du;
      for (int j = 0; j < n_grid; ++j) {
        const double phi = (j + 0.5) * dphi;
        const ChartPoint c = chart_ell(f, chart, {u, phi});
        const Vec4 y = psi_map(f, c.zeta);
        if (!(p.phi_sigma(y) < 0.0)) continue;
        sum += pullback_kernel(f, k, c.zeta) * c.jacobian * w(p, y) * du * dphi;
      }
    }
  };
  if (f.has_d1) run(Chart::l1, f.d1_theta.lo, f.d1_theta.hi);
  if (f.has_d2) run(Chart::l2, f.d2_rho.lo, f.d2_rho.hi);
  return sum;
}

double retarded_triangle_integral(const SpaceTimePoint& x, const std::array<Vec3, 3>& tri, const Vec3& normal,
                                  const std::function<std::array<double, 3>(const Vec4&)>& f, double t0, double t1,
                                  int m, int n) {
  if (m < 1 || n < 1) throw GeometryError("retarded_triangle_integral: bad rule size");
  const GaussRule& g = gauss_legendre(n);
  const Vec3 e1 = (tri[1] - tri[0]) / m, e2 = (tri[2] - tri[0]) / m;
  const double jac = e1.cross(e2).norm();
  double sum = 0.0;
  auto sub = [&](const Vec3& a, const Vec3& b, const Vec3& c) {
    // y = a + u (b - a) + u v (c - b), Jacobian 2 |T| u
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const double u = g.nodes[i], v = g.nodes[j];
        const Vec3 y = a + u * (b - a) + u * v * (c - b);
        const double tau = x.t - (x.x - y).norm();
        if (!(tau > t0 && tau < t1)) continue;
        const auto w = f(Vec4(tau, y[0], y[1], y[2]));
        const double k = w[0] * kernel_eval(KernelId::K1, x.x, y, normal) +
                         w[1] * kernel_eval(KernelId::K2, x.x, y, normal) +
                         w[2] * kernel_eval(KernelId::K3, x.x, y, normal);
        sum += g.weights[i] * g.weights[j] * u * jac * k;
      }
  };
  for (int i = 0; i < m; ++i)
    for (int j = 0; i + j < m; ++j) {
      const Vec3 a = tri[0] + i * e1 + j * e2;
      sub(a, a + e1, a + e2);
      if (i + j + 1 < m) sub(a + e1, a + e1 + e2, a + e2);
    }
  return sum;
}

double chart_length_check(const ConeFrame& f, Chart which, int n, double step, unsigned seed) {
  if (f.empty || (which == Chart::l1 && !f.has_d1) || (which == Chart::l2 && !f.has_d2))
    throw GeometryError("chart_length_check: empty chart domain");
  std::mt19937_64 rng(seed);
  const Interval u = which == Chart::l1 ? f.d1_theta : f.d2_rho;
  // stay a few steps away from the domain ends
  std::uniform_real_distribution<double> du(u.lo + 4.0 * step, u.hi - 4.0 * step);
  std::uniform_real_distribution<double> dphi(0.0, 2.0 * std::numbers::pi);
  auto image = [&](double a, double b) {
    const Zeta z = chart_ell(f, which, {a, b}).zeta;
    return Vec3(z.rho, z.phi, z.theta);
  };
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double a = du(rng), b = dphi(rng);
    // representable offsets, so differences of affine maps are exact
    const double ap = a + step, am = a - step, bp = b + step, bm = b - step;
    Eigen::Matrix<double, 3, 2> D;
    D.col(0) = (image(ap, b) - image(am, b)) / (ap - am);
    D.col(1) = (image(a, bp) - image(a, bm)) / (bp - bm);
    const double fd = std::sqrt((D.transpose() * D).determinant());
    const double cf = chart_ell(f, which, {a, b}).jacobian;
    worst = std::max(worst, std::abs(fd - cf) / std::abs(cf));
  }
  return worst;
}

}  // namespace stbem
