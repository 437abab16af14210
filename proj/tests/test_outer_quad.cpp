#include <cmath>
#include <random>

#include "doctest.h"
#include "stbem/outer_quad.hpp"
#include "stbem/st_mesh.hpp"

using namespace stbem;

namespace {

Panel sample_panel() {
  return panel_from_vertices({Vec4(0.1, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0.3, 0, 1, 0), Vec4(1.2, 0.2, 0.3, 0)});
}

// Exact integral of a polynomial over the panel with the degree-5 rule.
double volume_integral(const Panel& p, const std::function<double(const Vec4&)>& f) {
  const VolumeRule& r = tetrahedron_rule();
  double s = 0.0;
  for (std::size_t q = 0; q < r.weights.size(); ++q) {
    Vec4 y = Vec4::Zero();
    for (int i = 0; i < 4; ++i) y += r.bary[q][i] * p.vertices[i];
    s += r.weights[q] * f(y);
  }
  return p.volume() * s;
}

}  // namespace

TEST_CASE("sub-triangle centroids") {
  const Vec4 a(0, 0, 0, 0), b(1, 0, 0, 0), c(0, 1, 0, 0);
  const auto one = subtriangle_centroids(a, b, c, 1);
  REQUIRE(one.size() == 1);
  CHECK((one[0] - (a + b + c) / 3.0).norm() < 1e-16);
  for (int m : {2, 3, 5}) {
    const auto pts = subtriangle_centroids(a, b, c, m);
    CHECK(pts.size() == std::size_t(m * m));
    const auto perm = subtriangle_centroids(c, a, b, m);
    for (std::size_t i = 0; i < pts.size(); ++i) CHECK((pts[i] - perm[i]).norm() == 0.0);
    Vec4 mean = Vec4::Zero();
    for (const auto& p : pts) mean += p / double(pts.size());
    CHECK((mean - (a + b + c) / 3.0).norm() < 1e-15);
  }
}

TEST_CASE("boundary rule") {
  const Panel p = sample_panel();
  for (int m : {1, 3}) {
    const OuterRule r = boundary_rule(p, m);
    for (const auto& f : r.faces) {
      if (f.skip) continue;
      CHECK(f.nodes.size() == std::size_t(m * m));
      double s = 0.0;
      for (double w : f.weights) s += w;
      CHECK(std::abs(s - f.area) <= 1e-14);
    }
  }
  CHECK_THROWS_AS(boundary_rule(p, 0), GeometryError);
  const Panel lateral = make_mesh(SurfaceKind::cube, 0, 1.0, 1).panel(0);
  int skipped = 0;
  for (const auto& f : boundary_rule(lateral, 3).faces) skipped += f.skip;
  CHECK(skipped >= 1);
}

TEST_CASE("constants cancel") {
  for (const auto& p : make_mesh(SurfaceKind::sphere, 0, 1.0, 2).panels()) {
    const OuterRule r = boundary_rule(p, 3);
    CHECK(std::abs(bilinear_entry([](const SpaceTimePoint&) { return 2.5; }, p, r)) < 1e-14);
  }
}

TEST_CASE("affine in time gives the panel volume") {
  const Panel p = sample_panel();
  for (int m : {1, 3}) {
    const OuterRule r = boundary_rule(p, m);
    const double v = bilinear_entry([](const SpaceTimePoint& y) { return 1.0 + 3.0 * y.t + y.x[0]; }, p, r);
    // - closed integral of nu_t (1 + 3 t + x1) = - int d_t(...) = -3 |sigma|
    CHECK(v == doctest::Approx(-3.0 * p.volume()).epsilon(1e-13));
  }
}

TEST_CASE("smooth functions converge to the divergence form") {
  const Panel p = sample_panel();
  const auto w = [](const Vec4& y) { return std::sin(y[0] + 0.5 * y[1]) * std::exp(y[2]); };
  const auto dtw = [](const Vec4& y) { return std::cos(y[0] + 0.5 * y[1]) * std::exp(y[2]); };
  const double ref = -volume_integral(p, dtw);
  double prev = 1.0;
  for (int m : {1, 2, 4, 8, 16}) {
    const double v = bilinear_entry([&](const SpaceTimePoint& y) { return w(y.vec()); }, p, boundary_rule(p, m));
    const double err = std::abs(v - ref);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-3 * std::abs(ref));
}

TEST_CASE("telescoping over a mesh") {
  // summing over all panels of a time slab leaves only the t = const faces
  const SpaceTimeMesh m = make_mesh(SurfaceKind::cube, 1, 2.0, 2);
  const auto g = [](const SpaceTimePoint& y) { return y.t * y.t + y.x[0]; };
  double sum = 0.0;
  for (const auto& p : m.panels()) sum += bilinear_entry(g, p, boundary_rule(p, 3));
  // - int_Gamma (T^2 - 0) = -6 * 4
  CHECK(sum == doctest::Approx(-24.0).epsilon(1e-12));
}

TEST_CASE("tetrahedron rule is exact for degree five") {
  const VolumeRule& r = tetrahedron_rule();
  CHECK(r.weights.size() == 14);
  double s = 0.0;
  for (double w : r.weights) s += w;
  CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
  // int over the reference simplex of l0^a l1^b / |T| = 3! a! b! / (a + b + 3)!
  auto fact = [](int n) { return std::tgamma(n + 1.0); };
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; a + b <= 5; ++b) {
      double q = 0.0;
      for (std::size_t k = 0; k < r.weights.size(); ++k)
        q += r.weights[k] * std::pow(r.bary[k][0], a) * std::pow(r.bary[k][1], b);
      CHECK(q == doctest::Approx(6.0 * fact(a) * fact(b) / fact(a + b + 3)).epsilon(1e-13));
    }
}
