#include "stbem/outer_quad.hpp"

#include <algorithm>
#include <cmath>

namespace stbem {

namespace {

bool lex_less(const Vec4& a, const Vec4& b) {
  for (int i = 0; i < 4; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace

double triangle_area(const Vec4& a, const Vec4& b, const Vec4& c) {
  const Vec4 e1 = b - a, e2 = c - a;
  const double g = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
  return 0.5 * std::sqrt(std::max(g, 0.0));
}

std::vector<Vec4> subtriangle_centroids(const Vec4& a, const Vec4& b, const Vec4& c, int m) {
  if (m < 1) throw GeometryError("subtriangle_centroids: m must be positive");
  std::array<Vec4, 3> v{a, b, c};
  std::sort(v.begin(), v.end(), lex_less);
  std::vector<Vec4> out;
  out.reserve(std::size_t(m) * m);
  const double s = 1.0 / (3.0 * m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; i + j < m; ++j) {
      const int k = 3 * m - (3 * i + 1) - (3 * j + 1);
      out.push_back(s * ((3 * i + 1) * v[0] + (3 * j + 1) * v[1] + k * v[2]));
      if (i + j < m - 1) {
        const int k2 = 3 * m - (3 * i + 2) - (3 * j + 2);
        out.push_back(s * ((3 * i + 2) * v[0] + (3 * j + 2) * v[1] + k2 * v[2]));
      }
    }
  }
  return out;
}

OuterRule boundary_rule(const Panel& p, int m_Q) {
  if (m_Q < 1) throw GeometryError("boundary_rule: m_Q must be positive");
  OuterRule r;
  r.m_Q = m_Q;
  for (int f = 0; f < 4; ++f) {
    BoundaryFaceData& d = r.faces[f];
    d.face = f;
    d.nu_t = p.faces[f].conormal[0];
    d.skip = std::abs(d.nu_t) < 1e-14;
    const auto& fv = p.faces[f].vertices;
    const Vec4 &a = p.vertices[fv[0]], &b = p.vertices[fv[1]], &c = p.vertices[fv[2]];
    d.area = triangle_area(a, b, c);
    if (d.skip) continue;
    d.nodes = subtriangle_centroids(a, b, c, m_Q);
    d.weights.assign(d.nodes.size(), d.area / (double(m_Q) * m_Q));
  }
  return r;
}

double bilinear_entry(const std::function<double(const SpaceTimePoint&)>& A, const Panel&, const OuterRule& rule) {
  double sum = 0.0;
  for (const auto& f : rule.faces) {
    if (f.skip) continue;
    double s = 0.0;
    for (std::size_t q = 0; q < f.nodes.size(); ++q) s += f.weights[q] * A(SpaceTimePoint(f.nodes[q]));
    sum -= f.nu_t * s;
  }
  return sum;
}

const VolumeRule& tetrahedron_rule() {
  static const VolumeRule rule = [] {
    VolumeRule r;
    const double a = 0.0927352503108912, b = 0.3108859192633006, c = 0.4544962958743504;
    const double wa = 0.01224884051939366, wb = 0.01878132095300264, wc = 0.007091003462846911;
    for (auto [base, w] : {std::pair{a, wa}, std::pair{b, wb}}) {
      for (int i = 0; i < 4; ++i) {
        std::array<double, 4> l{base, base, base, base};
        l[i] = 1.0 - 3.0 * base;
        r.bary.push_back(l);
        r.weights.push_back(6.0 * w);
      }
    }
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        std::array<double, 4> l{c, c, c, c};
        l[i] = 0.5 - c;
        l[j] = 0.5 - c;
        r.bary.push_back(l);
        r.weights.push_back(6.0 * wc);
      }
    }
    return r;
  }();
  return rule;
}

}  // namespace stbem
