// Space-time points, tetrahedral panels in R^4, kernels and cone-ball bounds.
//
// Points are stored as (t, x1, x2, x3).  The backward light cone with apex
// (t, x) is the zero set of phi_xi(t - tau, x - y) = |x - y| - (t - tau).
#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "stbem/errors.hpp"

namespace stbem {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;

struct SpaceTimePoint {
  double t = 0.0;
  Vec3 x = Vec3::Zero();

  SpaceTimePoint() = default;
  SpaceTimePoint(double time, const Vec3& space) : t(time), x(space) {}
  explicit SpaceTimePoint(const Vec4& v) : t(v[0]), x(v.tail<3>()) {}

  Vec4 vec() const {
    Vec4 v;
    v << t, x;
    return v;
  }
};

// Face i of a panel is the triangle opposite vertex i.
struct PanelFace {
  std::array<int, 3> vertices{};
  Vec4 conormal = Vec4::Zero();  // unit, tangent to the panel, outward
};

class Panel {
 public:
  std::array<Vec4, 4> vertices{};
  Vec4 normal = Vec4::Zero();  // unit, normal[0] == 0 exactly
  std::array<PanelFace, 4> faces{};

  Vec3 spatial_normal() const { return normal.tail<3>(); }
  double volume() const { return volume_; }
  double diameter() const { return diameter_; }
  double min_time() const;
  double max_time() const;
  Vec4 centroid() const;

  // Affine barycentric coordinates of a point of the panel's hyperplane.
  std::array<double, 4> barycentric(const Vec4& p) const;
  // Tangential gradients of the barycentric coordinates (rows).
  const Eigen::Matrix<double, 4, 4>& barycentric_gradients() const { return bary_grad_; }

  // Signed distance-like level set: max_i <y - x_i, nu_i>, negative inside.
  double phi_sigma(const Vec4& y) const;

 private:
  friend Panel panel_from_vertices(const std::array<Vec4, 4>&);
  double volume_ = 0.0;
  double diameter_ = 0.0;
  Eigen::Matrix<double, 4, 4> bary_grad_ = Eigen::Matrix<double, 4, 4>::Zero();
};

enum class KernelId { K1 = 1, K2 = 2, K3 = 3 };

struct BoundingBall {
  Vec4 center = Vec4::Zero();
  double radius = 0.0;
};

struct ConeBallBounds {
  double min = 0.0;
  double max = 0.0;
  Vec4 argmin = Vec4::Zero();
  Vec4 argmax = Vec4::Zero();
};

// |x| - t for a space-time vector (t, x).
inline double phi_xi(const Vec4& v) { return v.tail<3>().norm() - v[0]; }

// k_i(x - y, n).  Throws GeometryError at coincident spatial points.
double kernel_eval(KernelId k, const Vec3& x, const Vec3& y, const Vec3& n);

// Builds a panel; the normal orientation follows the vertex order through the
// 4D cross product.  Throws GeometryError for degenerate or time-like input.
Panel panel_from_vertices(const std::array<Vec4, 4>& v);

// 4D generalization of the cross product: orthogonal to a, b, c with
// det[a; b; c; n] = |n|^2.
Vec4 cross4(const Vec4& a, const Vec4& b, const Vec4& c);

double d_r(double alpha, double r);

// Exact min/max of phi_xi(x - z) over the closed ball |z - y| <= r in R^4.
ConeBallBounds cone_ball_bounds(const SpaceTimePoint& x, const Vec4& y, double r);

}  // namespace stbem
