// Integration over the intersection of a backward light cone with a panel.
//
// For an apex x~ and a panel with normal (0, n) the cone is parametrized by
//   psi(rho, phi, theta) = x~ - r0 rho (1, R e(phi, theta)),
// e the unit vector with polar angle theta around R e3 = n.  The hyperplane
// of the panel is rho cos(theta) = rho0, covered by two charts:
//   l1(theta, phi) = (rho0 / cos theta, phi, theta)   near the foot point,
//   l2(rho, phi)   = (rho, phi, acos(rho0 / rho))     elsewhere.
#pragma once

#include <array>
#include <functional>

#include "stbem/geometry.hpp"
#include "stbem/implicit_quad.hpp"

namespace stbem {

enum class Chart { l1 = 1, l2 = 2 };

struct Zeta {
  double rho = 0.0;
  double phi = 0.0;
  double theta = 0.0;
};

struct ChartPoint {
  Zeta zeta;
  double jacobian = 0.0;
};

struct ConeFrame {
  bool empty = true;
  Vec4 apex = Vec4::Zero();
  double r0 = 0.0;
  double rho0 = 0.0;
  double rho_eq = 0.0;
  double theta_eq = 0.0;
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Vec4 anchor = Vec4::Zero();
  bool has_d1 = false;
  bool has_d2 = false;
  Interval d1_theta;  // [0, theta_eq) or (theta_eq, pi]
  Interval d2_rho;    // [rho_eq, 1]
};

ConeFrame build_cone_frame(const SpaceTimePoint& x, const Panel& p);

// Rotation with R e3 = n, det R = 1.
Eigen::Matrix3d householder_frame(const Vec3& n);

ChartPoint chart_ell(const ConeFrame& f, Chart chart, const Point2& eta);
Vec4 psi_map(const ConeFrame& f, const Zeta& z);
// k_i(psi) J_psi / (sqrt(2) |grad (d o psi)|), including the 1/(4 pi) factor.
double pullback_kernel(const ConeFrame& f, KernelId k, const Zeta& z);

// Density restricted to one panel.
class PanelDensity {
 public:
  enum class Kind { constant, affine, function };

  static PanelDensity constant(double c);
  static PanelDensity affine(const std::array<double, 4>& vertex_values);
  static PanelDensity function(std::function<double(const Vec4&)> f);

  Kind kind() const { return kind_; }
  double value() const { return c_; }
  const std::array<double, 4>& vertex_values() const { return vertex_; }

  // d/dtau of a constant or affine density (constant on the panel).
  PanelDensity time_derivative(const Panel& p) const;

  double operator()(const Panel& p, const Vec4& y) const;

 private:
  Kind kind_ = Kind::constant;
  double c_ = 0.0;
  std::array<double, 4> vertex_{};
  std::function<double(const Vec4&)> f_;
};

double inner_integral(const SpaceTimePoint& x, const Panel& p, KernelId k, const PanelDensity& w,
                      const QuadConfig& cfg);

// All integrals one quadrature pass provides for affine densities:
// T_k1 1, T_k2 1 and T_k3 lambda_v for the barycentric coordinates.
struct PanelMoments {
  double k1 = 0.0;
  double k2 = 0.0;
  std::array<double, 4> k3{};
};

// T_k1 a + T_k2 b + T_k3 c over one panel in a single quadrature pass;
// f returns (a, b, c) at a point of the panel.
double inner_integral_sum(const SpaceTimePoint& x, const Panel& p,
                          const std::function<std::array<double, 3>(const Vec4&)>& f, const QuadConfig& cfg);

PanelMoments panel_moments(const SpaceTimePoint& x, const Panel& p, const QuadConfig& cfg);

// Parameter boxes of each chart after clipping to the panel's extent.
struct ChartBoxes {
  std::vector<Box> l1;
  std::vector<Box> l2;
};
ChartBoxes chart_boxes(const ConeFrame& f, const Panel& p);

}  // namespace stbem
