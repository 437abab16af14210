#include "stbem/cone_quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stbem {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInv4Pi = 1.0 / (4.0 * std::numbers::pi);

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a[0] * b[1] - a[1] * b[0]; }

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts, double tol) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  std::vector<Eigen::Vector2d> unique;
  for (const auto& p : pts) {
    bool dup = false;
    for (const auto& q : unique) dup = dup || (p - q).norm() <= tol;
    if (!dup) unique.push_back(p);
  }
  if (unique.size() < 3) return unique;
  std::vector<Eigen::Vector2d> h(2 * unique.size());
  std::size_t k = 0;
  for (const auto& p : unique) {
    while (k >= 2 && cross2(h[k - 1] - h[k - 2], p - h[k - 2]) <= 0.0) --k;
    h[k++] = p;
  }
  for (std::size_t i = unique.size() - 1, t = k + 1; i-- > 0;) {
    const auto& p = unique[i];
    while (k >= t && cross2(h[k - 1] - h[k - 2], p - h[k - 2]) <= 0.0) --k;
    h[k++] = p;
  }
  h.resize(k - 1);
  return h;
}

double segment_distance(const Eigen::Vector2d& p, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d d = b - a;
  const double l2 = d.squaredNorm();
  double s = l2 > 0.0 ? (p - a).dot(d) / l2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - a - s * d).norm();
}

// Azimuth range of the panel seen from the foot point, and the in-plane
// distance from the foot point to the panel's spatial projection.
struct PlanarView {
  bool full = true;
  double lo = 0.0;
  double hi = kTwoPi;
  double min_dist = 0.0;
  double max_dist = 0.0;
};

PlanarView planar_view(const ConeFrame& f, const Panel& p) {
  PlanarView v;
  const Vec3 x = f.apex.tail<3>();
  const Vec3 e1 = f.R.col(0), e2 = f.R.col(1);
  std::vector<Eigen::Vector2d> q;
  double scale = p.diameter();
  for (const auto& y : p.vertices) {
    const Vec3 d = x - y.tail<3>();
    q.emplace_back(e1.dot(d), e2.dot(d));
    scale = std::max(scale, q.back().norm());
    v.max_dist = std::max(v.max_dist, q.back().norm());
  }
  const double tol = 1e-12 * scale;
  const auto hull = convex_hull(q, tol);
  if (hull.size() < 3) return v;
  bool inside = true;
  double dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    if (cross2(b - a, -a) < 0.0) inside = false;
    dist = std::min(dist, segment_distance(Eigen::Vector2d::Zero(), a, b));
  }
  if (inside || dist <= tol) return v;
  v.min_dist = dist;
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (const auto& h : hull) c += h;
  const double ref = std::atan2(c[1], c[0]);
  double lo = 0.0, hi = 0.0;
  for (const auto& h : hull) {
    const double d = std::remainder(std::atan2(h[1], h[0]) - ref, kTwoPi);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  const double pad = 1e-12;
  v.full = false;
  v.lo = ref + lo - pad;
  v.hi = ref + hi + pad;
  const double shift = kTwoPi * std::floor(v.lo / kTwoPi);
  v.lo -= shift;
  v.hi -= shift;
  return v;
}

void radial_l1(double rho0, double theta, double& P, double& Q, double& dP, double& dQ) {
  const double c = std::cos(theta), s = std::sin(theta);
  P = rho0 / c;
  Q = rho0 * s / c;
  dP = rho0 * s / (c * c);
  dQ = rho0 / (c * c);
}

void radial_l2(double rho0, double rho, double& P, double& Q, double& dP, double& dQ) {
  P = rho;
  Q = std::sqrt(std::max(rho * rho - rho0 * rho0, 0.0));
  dP = 1.0;
  dQ = Q > 0.0 ? rho / Q : (rho0 == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
}

// Face constraints <psi(l(eta)) - x_j, nu_j> in one chart.
class ChartRegion {
 public:
  ChartRegion(const ConeFrame& f, const Panel& p, Chart chart) : f_(f), chart_(chart) {
    tol_ = 1e-13 * (f.r0 + p.diameter());
    for (int j = 0; j < 4; ++j) {
      const Vec4& nu = p.faces[j].conormal;
      const Vec4& xj = p.vertices[p.faces[j].vertices[0]];
      const Vec3 a = f.R.transpose() * nu.tail<3>();
      Face& d = face_[j];
      const double beta = (f.apex - xj).dot(nu);
      d.alpha = beta - f.r0 * a[2] * f.rho0;
      d.nut = nu[0];
      d.a1 = a[0];
      d.a2 = a[1];
      d.amp = std::hypot(a[0], a[1]);
      d.phase = std::atan2(a[1], a[0]);
      // face through the foot point: g = Q (...) vanishes on the whole chart
      // edge Q = 0, so the factor Q is divided out
      d.through_foot = std::abs(d.alpha - f.r0 * d.nut * std::abs(f.rho0)) <= tol_;
      // apex on a light-like face: the cone touches the face along a ray and
      // otherwise stays on one side, which roundoff must not decide
      if (std::abs(beta) <= tol_ && std::abs(nu[0]) >= nu.tail<3>().norm() - 1e-12) d.fixed = nu[0] > 0.0 ? -1.0 : 1.0;
    }
  }

  // True if some face excludes the whole cone.
  bool empty() const {
    return std::any_of(face_.begin(), face_.end(), [](const Face& d) { return d.fixed > 0.0; });
  }

  std::size_t constraint_count() const { return 4; }
  double tolerance() const { return tol_; }

  double value(std::size_t k, const Point2& eta) const {
    const Radial& r = radial_cached(eta[0]);
    const Trig& t = trig_cached(eta[1]);
    const Face& d = face_[k];
    if (d.fixed != 0.0) return d.fixed;
    if (d.through_foot) return -f_.r0 * (d.nut * r.S + d.a1 * t.c + d.a2 * t.s);
    return d.alpha - f_.r0 * (d.nut * r.P + r.Q * (d.a1 * t.c + d.a2 * t.s));
  }

  double derivative(std::size_t k, int dir, const Point2& eta) const {
    const Radial& r = radial_cached(eta[0]);
    const Trig& t = trig_cached(eta[1]);
    const Face& d = face_[k];
    if (d.fixed != 0.0) return 0.0;
    if (d.through_foot) return dir == 0 ? -f_.r0 * d.nut * r.dS : -f_.r0 * (-d.a1 * t.s + d.a2 * t.c);
    if (dir == 0) return -f_.r0 * (d.nut * r.dP + r.dQ * (d.a1 * t.c + d.a2 * t.s));
    return -f_.r0 * r.Q * (-d.a1 * t.s + d.a2 * t.c);
  }

  std::optional<Interval> bounds(std::size_t k, const Box& b) const {
    const Face& d = face_[k];
    if (d.fixed != 0.0) return Interval{d.fixed, d.fixed};
    Ranges r = ranges(b);
    const Interval C = d.amp * cos_range(b.lo[1] - d.phase, b.hi[1] - d.phase);
    if (d.through_foot) return (-f_.r0) * (d.nut * r.S + C);
    return d.alpha + ((-f_.r0 * d.nut) * r.P + (-f_.r0) * (r.Q * C));
  }

  std::optional<Interval> derivative_bounds(std::size_t k, int dir, const Box& b) const {
    const Face& d = face_[k];
    if (d.fixed != 0.0) return Interval{0.0, 0.0};
    Ranges r = ranges(b);
    if (dir == 0) {
      if (d.through_foot) return (-f_.r0 * d.nut) * r.dS;
      const Interval C = d.amp * cos_range(b.lo[1] - d.phase, b.hi[1] - d.phase);
      return (-f_.r0 * d.nut) * r.dP + (-f_.r0) * (r.dQ * C);
    }
    const Interval S = (-d.amp) * sin_range(b.lo[1] - d.phase, b.hi[1] - d.phase);
    if (d.through_foot) return (-f_.r0) * S;
    return (-f_.r0) * (r.Q * S);
  }

 private:
  struct Face {
    double alpha = 0.0, nut = 0.0, a1 = 0.0, a2 = 0.0, amp = 0.0, phase = 0.0;
    double fixed = 0.0;  // -1 always satisfied, +1 never
    bool through_foot = false;
  };
  struct Ranges {
    Interval P, Q, dP, dQ, S, dS;
  };
  // S = (P - |rho0|) / Q, the time offset from the foot point per unit Q
  struct Radial {
    double u = std::numeric_limits<double>::quiet_NaN(), P = 0.0, Q = 0.0, dP = 0.0, dQ = 0.0, S = 0.0, dS = 0.0;
  };
  struct Trig {
    double phi = std::numeric_limits<double>::quiet_NaN(), c = 1.0, s = 0.0;
  };

  // consecutive evaluations mostly share one of the two coordinates
  const Radial& radial_cached(double u) const {
    if (u != radial_.u) {
      radial_.u = u;
      radial(u, radial_.P, radial_.Q, radial_.dP, radial_.dQ);
      foot_ratio(u, radial_.S, radial_.dS);
    }
    return radial_;
  }
  const Trig& trig_cached(double phi) const {
    if (phi != trig_.phi) {
      trig_.phi = phi;
      trig_.c = std::cos(phi);
      trig_.s = std::sin(phi);
    }
    return trig_;
  }

  void radial(double u, double& P, double& Q, double& dP, double& dQ) const {
    if (chart_ == Chart::l1) radial_l1(f_.rho0, u, P, Q, dP, dQ);
    else radial_l2(f_.rho0, u, P, Q, dP, dQ);
  }

  void foot_ratio(double u, double& S, double& dS) const {
    if (chart_ == Chart::l1) {
      // (1 - |cos u|) / |sin u| = tan(psi / 2), psi the angle from the foot axis
      const double c = std::abs(std::cos(u)), sn = std::abs(std::sin(u));
      S = sn / (1.0 + c);
      dS = (f_.rho0 >= 0.0 ? 0.5 : -0.5) * (1.0 + S * S);
    } else {
      const double a = std::abs(f_.rho0);
      if (a == 0.0) {
        S = 1.0;
        dS = 0.0;
        return;
      }
      S = std::sqrt(std::max(u - a, 0.0) / (u + a));
      dS = S > 0.0 ? a / ((u + a) * (u + a) * S) : std::numeric_limits<double>::infinity();
    }
  }

  // P, Q, S and their derivatives are monotone in the radial coordinate.
  Ranges ranges(const Box& b) const {
    double P0, Q0, dP0, dQ0, P1, Q1, dP1, dQ1, S0, dS0, S1, dS1;
    radial(b.lo[0], P0, Q0, dP0, dQ0);
    radial(b.hi[0], P1, Q1, dP1, dQ1);
    foot_ratio(b.lo[0], S0, dS0);
    foot_ratio(b.hi[0], S1, dS1);
    return {Interval::hull(P0, P1), Interval::hull(Q0, Q1), Interval::hull(dP0, dP1),
            Interval::hull(dQ0, dQ1), Interval::hull(S0, S1), Interval::hull(dS0, dS1)};
  }

  const ConeFrame& f_;
  Chart chart_;
  std::array<Face, 4> face_{};
  double tol_ = 0.0;
  mutable Radial radial_;
  mutable Trig trig_;
};

// Everything the integrands need at one parameter point.
struct ConePoint {
  double rho, phi, sin_t, cos_t, jacobian;
};

inline ConePoint cone_point(const ConeFrame& f, Chart chart, const Point2& eta) {
  ConePoint c;
  c.phi = eta[1];
  const double r0 = f.rho0;
  if (chart == Chart::l1) {
    c.cos_t = std::cos(eta[0]);
    c.sin_t = std::sin(eta[0]);
    c.rho = r0 / c.cos_t;
    const double c2 = c.cos_t * c.cos_t;
    c.jacobian = std::sqrt(1.0 + r0 * r0 * c.sin_t * c.sin_t / (c2 * c2));
  } else {
    c.rho = eta[0];
    if (r0 == 0.0) {
      c.cos_t = 0.0;
      c.sin_t = 1.0;
      c.jacobian = 1.0;
    } else {
      c.cos_t = std::clamp(r0 / c.rho, -1.0, 1.0);
      const double s2 = std::max(c.rho * c.rho - r0 * r0, 0.0);
      c.sin_t = std::sqrt(s2) / c.rho;
      c.jacobian = std::sqrt(1.0 + r0 * r0 / (c.rho * c.rho * s2));
    }
  }
  return c;
}

// pulled-back kernels divided by sin(theta) / sqrt(cos^2 + rho^2 sin^2)
inline void kernels(const ConeFrame& f, const ConePoint& c, double& k1, double& k2, double& k3) {
  const double g = c.sin_t / std::sqrt(c.cos_t * c.cos_t + c.rho * c.rho * c.sin_t * c.sin_t) * kInv4Pi;
  k1 = f.r0 * c.rho * g;
  k2 = f.rho0 * f.r0 * g;
  k3 = f.rho0 * g / c.rho;
}

inline Vec4 psi_at(const ConeFrame& f, const ConePoint& c) {
  const Vec3 e(c.sin_t * std::cos(c.phi), c.sin_t * std::sin(c.phi), c.cos_t);
  Vec4 d;
  d << 1.0, f.R * e;
  return f.apex - f.r0 * c.rho * d;
}

// Splits a chart box into pieces whose radial and angular extents on the
// cone are comparable; long thin boxes otherwise keep two nearly parallel
// face curves in one cell down to the maximal depth.
std::vector<Box> isotropic_split(const ConeFrame& f, Chart chart, const Box& b) {
  double P0, Q0, P1, Q1, d;
  if (chart == Chart::l1) {
    radial_l1(f.rho0, b.lo[0], P0, Q0, d, d);
    radial_l1(f.rho0, b.hi[0], P1, Q1, d, d);
  } else {
    radial_l2(f.rho0, b.lo[0], P0, Q0, d, d);
    radial_l2(f.rho0, b.hi[0], P1, Q1, d, d);
  }
  const double radial = std::hypot(P1 - P0, Q1 - Q0);
  const double angular = std::max(Q0, Q1) * b.width(1);
  constexpr int max_pieces = 64;
  int n_r = 1, n_phi = 1;
  if (angular > 2.0 * radial) n_phi = int(std::min<double>(max_pieces, std::ceil(angular / radial)));
  else if (radial > 2.0 * angular) n_r = int(std::min<double>(max_pieces, std::ceil(radial / std::max(angular, 1e-300))));
  std::vector<Box> out;
  out.reserve(std::size_t(n_r * n_phi));
  for (int i = 0; i < n_r; ++i)
    for (int j = 0; j < n_phi; ++j) {
      Box c;
      c.lo = {b.lo[0] + b.width(0) * i / n_r, b.lo[1] + b.width(1) * j / n_phi};
      c.hi = {i + 1 == n_r ? b.hi[0] : b.lo[0] + b.width(0) * (i + 1) / n_r,
              j + 1 == n_phi ? b.hi[1] : b.lo[1] + b.width(1) * (j + 1) / n_phi};
      out.push_back(c);
    }
  return out;
}

template <class F>
void integrate_cone(const SpaceTimePoint& x, const Panel& p, const QuadConfig& cfg, F&& f, ConeFrame* out = nullptr) {
  const ConeFrame frame = build_cone_frame(x, p);
  if (out) *out = frame;
  if (frame.empty) return;
  const ChartBoxes boxes = chart_boxes(frame, p);
  for (Chart chart : {Chart::l1, Chart::l2}) {
    const auto& list = chart == Chart::l1 ? boxes.l1 : boxes.l2;
    if (list.empty()) continue;
    ChartRegion region(frame, p, chart);
    if (region.empty()) return;
    detail::Quadtree<ChartRegion> tree(region, cfg);
    for (const Box& root : list)
      for (const Box& b : isotropic_split(frame, chart, root))
        tree.run(b, [&](const Point2& eta, double w) {
          const ConePoint c = cone_point(frame, chart, eta);
          f(frame, c, w * c.jacobian);
        });
  }
}

}  // namespace

Eigen::Matrix3d householder_frame(const Vec3& n) {
  const Vec3 e3 = Vec3::UnitZ();
  Eigen::Matrix3d R;
  if (n[2] >= 0.0) {
    const Vec3 v = n + e3;
    const Eigen::Matrix3d H = Eigen::Matrix3d::Identity() - 2.0 * v * v.transpose() / v.squaredNorm();
    R = H;
    R.col(2) = -H.col(2);
  } else {
    const Vec3 v = n - e3;
    const Eigen::Matrix3d H = Eigen::Matrix3d::Identity() - 2.0 * v * v.transpose() / v.squaredNorm();
    R = H;
    R.col(0) = -H.col(0);
  }
  return R;
}

ConeFrame build_cone_frame(const SpaceTimePoint& x, const Panel& p) {
  ConeFrame f;
  f.apex = x.vec();
  f.r0 = x.t - p.min_time();
  if (!(f.r0 > 0.0)) return f;
  f.anchor = p.vertices[0];
  f.R = householder_frame(p.spatial_normal());
  double rho0 = (f.apex - f.anchor).dot(p.normal) / f.r0;
  if (std::abs(rho0) < 1e-14) rho0 = 0.0;
  if (std::abs(rho0) >= 1.0) return f;
  f.rho0 = rho0;
  const double r2 = rho0 * rho0;
  f.rho_eq = std::sqrt(0.5 * (r2 + std::sqrt(r2 * r2 + 4.0 * r2)));
  f.theta_eq = rho0 == 0.0 ? 0.5 * kPi : std::acos(rho0 / f.rho_eq);
  f.has_d1 = rho0 != 0.0;
  f.d1_theta = rho0 > 0.0 ? Interval{0.0, f.theta_eq} : Interval{f.theta_eq, kPi};
  f.has_d2 = f.rho_eq < 1.0;
  f.d2_rho = Interval{f.rho_eq, 1.0};
  f.empty = false;
  return f;
}

ChartBoxes chart_boxes(const ConeFrame& f, const Panel& p) {
  ChartBoxes out;
  if (f.empty) return out;
  const PlanarView view = planar_view(f, p);
  const double h = f.r0 * f.rho0;
  const double t = f.apex[0];
  double rho_lo = std::max((t - p.max_time()) / f.r0, std::sqrt(h * h + view.min_dist * view.min_dist) / f.r0);
  double rho_hi = std::min(1.0, std::sqrt(h * h + view.max_dist * view.max_dist) / f.r0);
  rho_lo = std::max(rho_lo, std::abs(f.rho0));
  if (!(rho_hi > rho_lo)) return out;

  std::vector<std::pair<double, double>> phis;
  if (view.full) {
    phis.emplace_back(0.0, kTwoPi);
  } else if (view.hi <= kTwoPi) {
    phis.emplace_back(view.lo, view.hi);
  } else {
    phis.emplace_back(view.lo, kTwoPi);
    phis.emplace_back(0.0, view.hi - kTwoPi);
  }
  auto add = [&](std::vector<Box>& list, double a, double b) {
    if (!(b > a)) return;
    for (const auto& [lo, hi] : phis) list.push_back(Box{{a, lo}, {b, hi}});
  };
  if (f.has_d2) add(out.l2, std::max(rho_lo, f.rho_eq), rho_hi);
  if (f.has_d1) {
    const double a = rho_lo, b = std::min(rho_hi, f.rho_eq);
    if (b > a) {
      const double ta = std::acos(std::clamp(f.rho0 / a, -1.0, 1.0));
      const double tb = std::acos(std::clamp(f.rho0 / b, -1.0, 1.0));
      add(out.l1, std::min(ta, tb), std::max(ta, tb));
    }
  }
  return out;
}

ChartPoint chart_ell(const ConeFrame& f, Chart chart, const Point2& eta) {
  const ConePoint c = cone_point(f, chart, eta);
  ChartPoint out;
  out.zeta.rho = c.rho;
  out.zeta.phi = c.phi;
  out.zeta.theta = chart == Chart::l1 ? eta[0] : std::atan2(c.sin_t, c.cos_t);
  out.jacobian = c.jacobian;
  return out;
}

Vec4 psi_map(const ConeFrame& f, const Zeta& z) {
  const Vec3 e(std::sin(z.theta) * std::cos(z.phi), std::sin(z.theta) * std::sin(z.phi), std::cos(z.theta));
  Vec4 d;
  d << 1.0, f.R * e;
  return f.apex - f.r0 * z.rho * d;
}

double pullback_kernel(const ConeFrame& f, KernelId k, const Zeta& z) {
  ConePoint c{z.rho, z.phi, std::sin(z.theta), std::cos(z.theta), 1.0};
  double k1, k2, k3;
  kernels(f, c, k1, k2, k3);
  switch (k) {
    case KernelId::K1:
      return k1;
    case KernelId::K2:
      return k2;
    case KernelId::K3:
      return k3;
  }
  return 0.0;
}

PanelDensity PanelDensity::constant(double c) {
  PanelDensity d;
  d.kind_ = Kind::constant;
  d.c_ = c;
  return d;
}

PanelDensity PanelDensity::affine(const std::array<double, 4>& vertex_values) {
  PanelDensity d;
  d.kind_ = Kind::affine;
  d.vertex_ = vertex_values;
  return d;
}

PanelDensity PanelDensity::function(std::function<double(const Vec4&)> f) {
  PanelDensity d;
  d.kind_ = Kind::function;
  d.f_ = std::move(f);
  return d;
}

PanelDensity PanelDensity::time_derivative(const Panel& p) const {
  switch (kind_) {
    case Kind::constant:
      return constant(0.0);
    case Kind::affine: {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += vertex_[k] * p.barycentric_gradients()(k, 0);
      return constant(s);
    }
    case Kind::function:
      break;
  }
  throw GeometryError("time_derivative: not available for function densities");
}

double PanelDensity::operator()(const Panel& p, const Vec4& y) const {
  switch (kind_) {
    case Kind::constant:
      return c_;
    case Kind::affine: {
      const auto lam = p.barycentric(y);
      return lam[0] * vertex_[0] + lam[1] * vertex_[1] + lam[2] * vertex_[2] + lam[3] * vertex_[3];
    }
    case Kind::function:
      return f_(y);
  }
  return 0.0;
}

double inner_integral(const SpaceTimePoint& x, const Panel& p, KernelId k, const PanelDensity& w,
                      const QuadConfig& cfg) {
  double sum = 0.0;
  const bool constant = w.kind() == PanelDensity::Kind::constant;
  if (constant && w.value() == 0.0) return 0.0;
  integrate_cone(x, p, cfg, [&](const ConeFrame& f, const ConePoint& c, double weight) {
    double k1, k2, k3;
    kernels(f, c, k1, k2, k3);
    const double kv = k == KernelId::K1 ? k1 : (k == KernelId::K2 ? k2 : k3);
    const double wv = constant ? w.value() : w(p, psi_at(f, c));
    sum += weight * kv * wv;
  });
  return sum;
}

double inner_integral_sum(const SpaceTimePoint& x, const Panel& p,
                          const std::function<std::array<double, 3>(const Vec4&)>& f, const QuadConfig& cfg) {
  double sum = 0.0;
  integrate_cone(x, p, cfg, [&](const ConeFrame& fr, const ConePoint& c, double weight) {
    double k1, k2, k3;
    kernels(fr, c, k1, k2, k3);
    const auto v = f(psi_at(fr, c));
    sum += weight * (k1 * v[0] + k2 * v[1] + k3 * v[2]);
  });
  return sum;
}

PanelMoments panel_moments(const SpaceTimePoint& x, const Panel& p, const QuadConfig& cfg) {
  PanelMoments m;
  // lambda_v(psi) = lambda_v(x) - r0 (g_v0 rho + (R^T g_vx) . rho e), so four
  // weighted sums of k3 suffice
  double s0 = 0.0, s_rho = 0.0, s_x = 0.0, s_y = 0.0;
  ConeFrame frame;
  integrate_cone(x, p, cfg, [&](const ConeFrame& f, const ConePoint& c, double weight) {
    double k1, k2, k3;
    kernels(f, c, k1, k2, k3);
    m.k1 += weight * k1;
    m.k2 += weight * k2;
    if (f.rho0 != 0.0) {
      const double wk = weight * k3;
      const double rs = wk * c.rho * c.sin_t;
      s0 += wk;
      s_rho += wk * c.rho;
      s_x += rs * std::cos(c.phi);
      s_y += rs * std::sin(c.phi);
    }
  }, &frame);
  if (s0 != 0.0) {
    const auto lam = p.barycentric(x.vec());
    const auto& G = p.barycentric_gradients();
    for (int v = 0; v < 4; ++v) {
      const Vec3 b = frame.R.transpose() * G.row(v).tail<3>().transpose();
      m.k3[v] = lam[v] * s0 - frame.r0 * (G(v, 0) * s_rho + b[0] * s_x + b[1] * s_y + b[2] * frame.rho0 * s0);
    }
  }
  return m;
}

}  // namespace stbem
