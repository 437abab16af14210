// Reference computations used by the tests: closed-form cone integrals over a
// model panel, brute-force grid integration and finite-difference chart
// Jacobians.
#pragma once

#include "stbem/cone_quadrature.hpp"
#include "stbem/geometry.hpp"

namespace stbem {

enum class AppendixCase { corner, edge };

struct AppendixConfig {
  AppendixCase which = AppendixCase::corner;
  double t = 1.0;
  double eps = 0.5;
  double h = 0.0;  // panel scale; 0 selects 10 t
};

// Single layer of the indicator of conv{h e_tau, h e_1, h e_2, 0}, kernel
// 1/|x - y| (no 1/(4 pi)), at an apex in the panel's hyperplane.
double appendix_closed_form(const AppendixConfig& cfg);
Panel appendix_panel(const AppendixConfig& cfg);
SpaceTimePoint appendix_apex(const AppendixConfig& cfg);
// True if the slanted face stays inactive on the sampled intersection.
bool appendix_face4_inactive(const AppendixConfig& cfg, int samples = 200);

// Center-sampled uniform grids on both full chart domains.
double brute_force_inner(const SpaceTimePoint& x, const Panel& p, KernelId k, const PanelDensity& w, int n_grid);

// Classical retarded surface integral over a flat spatial triangle,
//   int_tri k1 a + k2 b + k3 c  at tau = t - |x - y|,
// with (a, b, c) = f(tau, y) and contributions outside t0 < tau < t1 dropped.
// Each of m^2 subtriangles uses an n x n collapsed Gauss rule; accurate when
// x is off the triangle's plane.
double retarded_triangle_integral(const SpaceTimePoint& x, const std::array<Vec3, 3>& tri, const Vec3& normal,
                                  const std::function<std::array<double, 3>(const Vec4&)>& f, double t0, double t1,
                                  int m, int n);

// Max relative deviation of the closed-form chart Jacobian from the central
// difference Gram determinant at n pseudo-random parameters.
double chart_length_check(const ConeFrame& f, Chart which, int n, double step = 1e-6, unsigned seed = 1);

}  // namespace stbem
