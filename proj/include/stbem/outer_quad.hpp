// Outer quadrature: for a test function that is the indicator of a panel,
//   b_A(w, 1_sigma) = - sum over faces F of nu_t(F) * int_F (A w),
// each face integrated by the midpoint rule on m_Q^2 congruent sub-triangles.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "stbem/geometry.hpp"

namespace stbem {

struct BoundaryFaceData {
  int face = 0;           // index of the opposite vertex
  double nu_t = 0.0;      // time component of the outward conormal
  bool skip = true;       // |nu_t| < 1e-14
  double area = 0.0;
  std::vector<Vec4> nodes;
  std::vector<double> weights;
};

struct OuterRule {
  int m_Q = 0;
  std::array<BoundaryFaceData, 4> faces;
};

// Centroids of the m^2 sub-triangles; the node order only depends on the
// set {a, b, c}, so faces shared by two panels get identical nodes.
std::vector<Vec4> subtriangle_centroids(const Vec4& a, const Vec4& b, const Vec4& c, int m);
double triangle_area(const Vec4& a, const Vec4& b, const Vec4& c);

OuterRule boundary_rule(const Panel& p, int m_Q);

double bilinear_entry(const std::function<double(const SpaceTimePoint&)>& A, const Panel& p, const OuterRule& rule);

// Tetrahedron rule exact for degree 5: barycentric points and weights summing to 1.
struct VolumeRule {
  std::vector<std::array<double, 4>> bary;
  std::vector<double> weights;
};
const VolumeRule& tetrahedron_rule();

}  // namespace stbem
