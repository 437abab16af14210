#include <cmath>
#include <numbers>

#include "doctest.h"
#include "stbem/oracles.hpp"

using namespace stbem;

namespace {

// 2 t int_{phi1}^{5 pi / 4} (1 + sqrt2 eps / (2 t sin phi)) dphi by composite Simpson
double corner_by_quadrature(double t, double eps) {
  const double a = std::numbers::pi + std::asin(std::numbers::sqrt2 * eps / (2.0 * t));
  const double b = 1.25 * std::numbers::pi;
  const int n = 20000;
  const double h = (b - a) / n;
  auto f = [&](double p) { return 1.0 + std::numbers::sqrt2 * eps / (2.0 * t * std::sin(p)); };
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return 2.0 * t * s * h / 3.0;
}

ConeFrame frame_with_rho0(double rho0) {
  const AppendixConfig cfg{AppendixCase::corner, 1.0, 0.5, 10.0};
  const Panel p = appendix_panel(cfg);
  const double z = rho0 / p.normal[3];
  return build_cone_frame(SpaceTimePoint(1.0, Vec3(0.3, 0.2, z)), p);
}

}  // namespace

TEST_CASE("corner closed form matches direct quadrature of its defining integral") {
  for (double t : {0.5, 1.0, 2.0})
    for (double r : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const double v = appendix_closed_form({AppendixCase::corner, t, r * t, 0.0});
      CHECK(v == doctest::Approx(corner_by_quadrature(t, r * t)).epsilon(1e-10));
    }
}

TEST_CASE("frozen closed-form values") {
  struct Row {
    double t, ratio, corner, edge;
  };
  const Row rows[] = {{0.5, 0.05, 0.6385330, 1.3363628}, {1.0, 0.05, 1.2770659, 2.6727256},
                      {1.0, 0.25, 0.6720569, 1.6045136}, {1.0, 0.5, 0.2691759, 0.7774372},
                      {1.0, 0.75, 0.0636889, 0.2524203}, {1.0, 0.95, 0.0025020, 0.0213516},
                      {2.0, 0.5, 0.5383519, 1.5548744}};
  for (const auto& r : rows) {
    CHECK(appendix_closed_form({AppendixCase::corner, r.t, r.ratio * r.t, 0.0}) ==
          doctest::Approx(r.corner).epsilon(2e-6));
    CHECK(appendix_closed_form({AppendixCase::edge, r.t, r.ratio * r.t, 0.0}) ==
          doctest::Approx(r.edge).epsilon(2e-6));
  }
  CHECK(std::abs(appendix_closed_form({AppendixCase::edge, 1.0, 0.5, 0.0}) - 0.77746) < 1e-4);
}

TEST_CASE("small eps limits") {
  for (double t : {0.5, 1.0, 3.0}) {
    CHECK(appendix_closed_form({AppendixCase::corner, t, 1e-8, 0.0}) ==
          doctest::Approx(std::numbers::pi * t / 2.0).epsilon(1e-6));
    CHECK(appendix_closed_form({AppendixCase::edge, t, 1e-8, 0.0}) ==
          doctest::Approx(std::numbers::pi * t).epsilon(1e-6));
  }
}

TEST_CASE("closed forms decrease in eps") {
  for (auto c : {AppendixCase::corner, AppendixCase::edge})
    for (double t : {0.5, 1.0, 2.0}) {
      double prev = appendix_closed_form({c, t, 1e-3 * t, 0.0});
      for (int i = 2; i < 1000; ++i) {
        const double v = appendix_closed_form({c, t, 1e-3 * i * t, 0.0});
        CHECK(v < prev);
        prev = v;
      }
    }
}

TEST_CASE("domain violations throw") {
  CHECK_THROWS_AS(appendix_closed_form({AppendixCase::corner, 1.0, 1.5, 0.0}), GeometryError);
  CHECK_THROWS_AS(appendix_closed_form({AppendixCase::edge, 1.0, 0.0, 0.0}), GeometryError);
  CHECK_THROWS_AS(appendix_closed_form({AppendixCase::edge, -1.0, 0.5, 0.0}), GeometryError);
}

TEST_CASE("slanted face inactive for h = 10 t") {
  for (auto c : {AppendixCase::corner, AppendixCase::edge})
    for (double t : {0.5, 1.0, 2.0})
      for (double r : {0.05, 0.5, 0.95}) CHECK(appendix_face4_inactive({c, t, r * t, 0.0}));
  CHECK_FALSE(appendix_face4_inactive({AppendixCase::corner, 1.0, 0.05, 1.0}));
}

TEST_CASE("brute force agrees with closed forms") {
  for (auto c : {AppendixCase::corner, AppendixCase::edge}) {
    const AppendixConfig cfg{c, 1.0, 0.5, 0.0};
    const double bf = brute_force_inner(appendix_apex(cfg), appendix_panel(cfg), KernelId::K1,
                                        PanelDensity::constant(1.0), 2000);
    CHECK(4.0 * std::numbers::pi * bf == doctest::Approx(appendix_closed_form(cfg)).epsilon(0.01));
  }
}

TEST_CASE("brute force is zero without intersection") {
  const AppendixConfig cfg{AppendixCase::corner, 1.0, 0.5, 0.0};
  const Panel p = appendix_panel(cfg);
  CHECK(brute_force_inner(SpaceTimePoint(-1.0, Vec3(0.1, 0.1, 0.0)), p, KernelId::K1, PanelDensity::constant(1.0),
                          50) == 0.0);
  CHECK(brute_force_inner(SpaceTimePoint(1.0, Vec3(50.0, 50.0, 0.0)), p, KernelId::K1, PanelDensity::constant(1.0),
                          50) == 0.0);
  CHECK_THROWS(brute_force_inner(SpaceTimePoint(1.0, Vec3::Zero()), p, KernelId::K1, PanelDensity::constant(1.0), 5));
}

TEST_CASE("chart jacobians") {
  const ConeFrame flat = frame_with_rho0(0.0);
  REQUIRE_FALSE(flat.empty);
  CHECK(flat.rho0 == 0.0);
  CHECK(chart_length_check(flat, Chart::l2, 1000) <= 1e-10);

  for (double rho0 : {0.3, -0.3, 0.05, -0.7}) {
    const ConeFrame f = frame_with_rho0(rho0);
    REQUIRE_FALSE(f.empty);
    CHECK(f.rho0 == doctest::Approx(rho0).epsilon(1e-12));
    CHECK(chart_length_check(f, Chart::l1, 1000) <= 1e-6);
    if (f.has_d2) CHECK(chart_length_check(f, Chart::l2, 1000) <= 1e-6);
  }
}

TEST_CASE("charts agree on the seam") {
  for (double rho0 : {0.3, -0.3, 0.01, 0.5}) {
    const ConeFrame f = frame_with_rho0(rho0);
    for (double phi : {0.0, 1.0, 2.5, 6.0}) {
      const ChartPoint a = chart_ell(f, Chart::l1, {f.theta_eq, phi});
      const ChartPoint b = chart_ell(f, Chart::l2, {f.rho_eq, phi});
      const Vec4 pa = psi_map(f, a.zeta), pb = psi_map(f, b.zeta);
      CHECK((pa - pb).norm() <= 1e-12);
      CHECK(a.jacobian > 0.0);
    }
  }
}
