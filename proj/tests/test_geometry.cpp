#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "stbem/geometry.hpp"

using namespace stbem;

namespace {

Panel lateral_panel() {
  // three points of the plane x3 = 0, one of them at two times
  return panel_from_vertices({Vec4(0, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0, 0, 1, 0), Vec4(1, 0, 0, 0)});
}

}  // namespace

TEST_CASE("phi_xi") {
  CHECK(phi_xi(Vec4(1, 1, 0, 0)) == 0.0);
  CHECK(phi_xi(Vec4(2, 1, 0, 0)) == -1.0);
  CHECK(phi_xi(Vec4(0, 3, 4, 0)) == 5.0);
}

TEST_CASE("kernel values") {
  const double c = 1.0 / (4.0 * std::numbers::pi);
  const Vec3 n(0, 0, 1);
  CHECK(kernel_eval(KernelId::K1, Vec3(0, 0, 2), Vec3::Zero(), n) == doctest::Approx(c / 2));
  CHECK(kernel_eval(KernelId::K2, Vec3(0, 0, 2), Vec3::Zero(), n) == doctest::Approx(c / 2));
  CHECK(kernel_eval(KernelId::K3, Vec3(0, 0, 2), Vec3::Zero(), n) == doctest::Approx(c / 4));
  CHECK(kernel_eval(KernelId::K3, Vec3(2, 0, 0), Vec3::Zero(), n) == 0.0);
  CHECK_THROWS_AS(kernel_eval(KernelId::K1, Vec3::Ones(), Vec3::Ones(), n), GeometryError);
}

TEST_CASE("cross4 is orthogonal") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 100; ++i) {
    Vec4 a, b, c;
    for (int k = 0; k < 4; ++k) {
      a[k] = g(rng);
      b[k] = g(rng);
      c[k] = g(rng);
    }
    const Vec4 n = cross4(a, b, c);
    CHECK(std::abs(n.dot(a)) < 1e-12);
    CHECK(std::abs(n.dot(b)) < 1e-12);
    CHECK(std::abs(n.dot(c)) < 1e-12);
    Eigen::Matrix4d m;
    m << a.transpose(), b.transpose(), c.transpose(), n.transpose();
    CHECK(m.determinant() == doctest::Approx(n.squaredNorm()));
  }
}

TEST_CASE("panel normal and conormals") {
  const Panel p = lateral_panel();
  CHECK(p.normal[0] == 0.0);
  CHECK(std::abs(std::abs(p.normal[3]) - 1.0) < 1e-15);
  CHECK(p.volume() == doctest::Approx(1.0 / 6.0));
  for (const auto& f : p.faces) {
    CHECK(std::abs(f.conormal.norm() - 1.0) < 1e-14);
    CHECK(std::abs(f.conormal.dot(p.normal)) < 1e-14);
  }
  // the face opposite the top vertex lies in tau = 0 and points to the past
  CHECK(p.faces[3].conormal[0] == doctest::Approx(-1.0));
}

TEST_CASE("reference panel") {
  const Panel p = panel_from_vertices({Vec4(1, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0, 0, 1, 0), Vec4(0, 0, 0, 0)});
  CHECK((p.normal - Vec4(0, 0, 0, 1)).norm() < 1e-15);
  CHECK((p.faces[0].conormal - Vec4(-1, 0, 0, 0)).norm() < 1e-15);
  CHECK((p.faces[3].conormal - Vec4(1, 1, 1, 0) / std::sqrt(3.0)).norm() < 1e-15);
  CHECK(p.phi_sigma(Vec4(-0.1, 0.2, 0.2, 0)) == doctest::Approx(0.1));
  CHECK(kernel_eval(KernelId::K1, Vec3(1, 0, 0), Vec3::Zero(), Vec3(0, 0, 1)) == doctest::Approx(0.0795775));
  CHECK(kernel_eval(KernelId::K3, Vec3(2, 0, 0), Vec3::Zero(), Vec3(1, 0, 0)) ==
        doctest::Approx(1.0 / (16.0 * std::numbers::pi)));
  CHECK(phi_xi(Vec4(0.5, 3, 4, 0)) == 4.5);
}

TEST_CASE("phi_sigma sign") {
  const Panel p = lateral_panel();
  CHECK(p.phi_sigma(p.centroid()) < 0.0);
  for (const auto& v : p.vertices) CHECK(std::abs(p.phi_sigma(v)) < 1e-15);
  CHECK(p.phi_sigma(Vec4(-0.1, 0.2, 0.2, 0)) > 0.0);
  CHECK(p.phi_sigma(Vec4(0.2, 0.9, 0.9, 0)) > 0.0);
}

TEST_CASE("phi_sigma independent of vertex order") {
  const std::array<Vec4, 4> v = {Vec4(0, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0, 0, 1, 0), Vec4(1, 0, 0, 0)};
  const Panel a = panel_from_vertices(v);
  std::array<int, 4> perm{0, 1, 2, 3};
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 1.5);
  do {
    const Panel b = panel_from_vertices({v[perm[0]], v[perm[1]], v[perm[2]], v[perm[3]]});
    CHECK(std::abs(std::abs(a.normal.dot(b.normal)) - 1.0) < 1e-15);
    for (int i = 0; i < 20; ++i) {
      const Vec4 y(u(rng), u(rng), u(rng), 0.0);
      CHECK(a.phi_sigma(y) == doctest::Approx(b.phi_sigma(y)).epsilon(1e-14));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("barycentric coordinates") {
  const Panel p = lateral_panel();
  for (int i = 0; i < 4; ++i) {
    const auto l = p.barycentric(p.vertices[i]);
    for (int j = 0; j < 4; ++j) CHECK(l[j] == doctest::Approx(i == j ? 1.0 : 0.0));
  }
  // time derivative of the barycentrics: only the top vertex grows in time
  CHECK(p.barycentric_gradients()(3, 0) == doctest::Approx(1.0));
  CHECK(p.barycentric_gradients()(0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("degenerate and time-like panels") {
  CHECK_THROWS_AS(panel_from_vertices({Vec4(0, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0, 2, 0, 0), Vec4(1, 0, 0, 0)}),
                  GeometryError);
  // spans three spatial directions: the normal is the time axis
  CHECK_THROWS_AS(panel_from_vertices({Vec4(0, 0, 0, 0), Vec4(0, 1, 0, 0), Vec4(0, 0, 1, 0), Vec4(0, 0, 0, 1)}),
                  GeometryError);
}

TEST_CASE("cone ball bounds contain samples and are attained") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const SpaceTimePoint x(3.0 * g(rng), Vec3(g(rng), g(rng), g(rng)));
    const Vec4 y(3.0 * g(rng), g(rng), g(rng), g(rng));
    const double r = trial % 3 == 0 ? 0.01 : 2.0 * u(rng);
    const ConeBallBounds b = cone_ball_bounds(x, y, r);
    CHECK(b.min <= b.max);
    CHECK((b.argmin - y).norm() <= r + 1e-14 * (1.0 + y.norm()));
    CHECK((b.argmax - y).norm() <= r + 1e-14 * (1.0 + y.norm()));
    CHECK(std::abs(phi_xi(x.vec() - b.argmin) - b.min) <= 1e-12 * (1.0 + std::abs(b.min)));
    CHECK(std::abs(phi_xi(x.vec() - b.argmax) - b.max) <= 1e-12 * (1.0 + std::abs(b.max)));
    for (int s = 0; s < 200; ++s) {
      Vec4 d(g(rng), g(rng), g(rng), g(rng));
      d *= r * std::pow(u(rng), 0.25) / d.norm();
      const double v = phi_xi(x.vec() - (y + d));
      CHECK(v >= b.min - 1e-12);
      CHECK(v <= b.max + 1e-12);
    }
  }
}

TEST_CASE("d_r branches") {
  CHECK(d_r(0.0, 1.0) == doctest::Approx(1.0));
  CHECK(d_r(2.0, 1.0) == doctest::Approx(std::numbers::sqrt2));
  CHECK(d_r(1.0 / std::numbers::sqrt2, 1.0) == doctest::Approx(std::numbers::sqrt2));
}
