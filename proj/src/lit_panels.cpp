#include "stbem/lit_panels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace stbem {

namespace {

double lit_tolerance(const SpaceTimePoint& x, double size) {
  return 1e-12 * (1.0 + std::abs(x.t) + x.x.norm() + size);
}

int build(ClusterTree& tree, const SpaceTimeMesh& m, std::size_t begin, std::size_t end) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.push_back({});
  tree.nodes[id].begin = begin;
  tree.nodes[id].end = end;
  tree.nodes[id].ball = bounding_ball(m, std::span<const std::size_t>(tree.order.data() + begin, end - begin));
  if (end - begin <= std::size_t(tree.n_min)) return id;

  Vec4 lo = Vec4::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
  for (std::size_t i = begin; i < end; ++i) {
    const Vec4 c = m.panel(tree.order[i]).centroid();
    lo = lo.cwiseMin(c);
    hi = hi.cwiseMax(c);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(tree.order.begin() + begin, tree.order.begin() + mid, tree.order.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     return m.panel(a).centroid()[axis] < m.panel(b).centroid()[axis];
                   });
  const int left = build(tree, m, begin, mid);
  const int right = build(tree, m, mid, end);
  tree.nodes[id].left = left;
  tree.nodes[id].right = right;
  return id;
}

}  // namespace

BoundingBall bounding_ball(std::span<const Vec4> pts) {
  BoundingBall b;
  if (pts.empty()) return b;
  auto farthest = [&](const Vec4& from) {
    std::size_t best = 0;
    double d = -1.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double e = (pts[i] - from).squaredNorm();
      if (e > d) {
        d = e;
        best = i;
      }
    }
    return best;
  };
  const Vec4& q = pts[farthest(pts[0])];
  const Vec4& r = pts[farthest(q)];
  b.center = 0.5 * (q + r);
  b.radius = 0.5 * (q - r).norm();
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& p : pts) {
      const double d = (p - b.center).norm();
      if (d > b.radius) {
        const double grown = 0.5 * (b.radius + d);
        b.center += (d - grown) / d * (p - b.center);
        b.radius = grown;
      }
    }
  }
  double reach = 0.0;
  for (const auto& p : pts) reach = std::max(reach, (p - b.center).norm());
  b.radius = std::max({b.radius, reach, 1e-14 * (1.0 + b.center.norm())});
  return b;
}

BoundingBall bounding_ball(const SpaceTimeMesh& m, std::span<const std::size_t> panels) {
  std::vector<Vec4> pts;
  pts.reserve(4 * panels.size());
  for (std::size_t i : panels)
    for (const auto& v : m.panel(i).vertices) pts.push_back(v);
  return bounding_ball(std::span<const Vec4>(pts));
}

ClusterTree build_cluster_tree(const SpaceTimeMesh& m, int n_min) {
  if (n_min < 1) throw MeshError("build_cluster_tree: n_min must be positive");
  ClusterTree tree;
  tree.n_min = n_min;
  tree.order.resize(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) tree.order[i] = i;
  if (m.size() > 0) {
    tree.nodes.reserve(4 * m.size() / n_min + 4);
    build(tree, m, 0, m.size());
  }
  return tree;
}

std::vector<std::size_t> approximate_lit_leaves(const ClusterTree& tree, const SpaceTimePoint& x) {
  std::vector<std::size_t> out;
  if (tree.nodes.empty()) return out;
  std::vector<int> stack{0};
  while (!stack.empty()) {
    const ClusterNode& n = tree.nodes[stack.back()];
    stack.pop_back();
    const ConeBallBounds b = cone_ball_bounds(x, n.ball.center, n.ball.radius);
    const double tol = 100.0 * lit_tolerance(x, n.ball.radius);
    if (b.min > tol || b.max < -tol) continue;
    if (n.leaf()) {
      out.insert(out.end(), tree.order.begin() + n.begin, tree.order.begin() + n.end);
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

ConeRange cone_range(const SpaceTimePoint& x, const Panel& p) {
  ConeRange r;
  r.min = std::numeric_limits<double>::infinity();
  r.max = -r.min;
  for (const auto& v : p.vertices) {
    const double f = (x.x - v.tail<3>()).norm() - (x.t - v[0]);
    r.min = std::min(r.min, f);
    r.max = std::max(r.max, f);
  }
  // |x - y| + tau is convex; its minimum over the closed tetrahedron sits in
  // the relative interior of one face, where it is the unconstrained minimum
  // over that face's affine hull.
  for (int mask = 1; mask < 16; ++mask) {
    int idx[4], k = 0;
    for (int j = 0; j < 4; ++j)
      if (mask & (1 << j)) idx[k++] = j;
    if (k < 2) continue;
    const int dim = k - 1;
    const Vec4& base = p.vertices[idx[0]];
    Eigen::Matrix<double, 3, Eigen::Dynamic, 0, 3, 3> B(3, dim);
    Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1> d(dim);
    for (int j = 0; j < dim; ++j) {
      const Vec4 e = p.vertices[idx[j + 1]] - base;
      B.col(j) = e.tail<3>();
      d[j] = e[0];
    }
    const Vec3 a = base.tail<3>() - x.x;
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> G = B.transpose() * B;
    const double gscale = G.trace();
    if (!(gscale > 0.0)) continue;
    Eigen::LDLT<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>> ldlt(G);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-12 * gscale) continue;
    const auto a_par = ldlt.solve(-(B.transpose() * a)).eval();
    const Vec3 perp = a + B * a_par;
    const auto Gd = ldlt.solve(d).eval();
    const double s = d.dot(Gd);
    if (!(s < 1.0 - 1e-14)) continue;
    const double n = perp.norm() / std::sqrt(1.0 - s);
    const auto lam = (a_par - n * Gd).eval();
    const double lam0 = 1.0 - lam.sum();
    if (lam0 < -1e-12 || lam.minCoeff() < -1e-12) continue;
    const double f = (a + B * lam).norm() + base[0] + d.dot(lam) - x.t;
    r.min = std::min(r.min, f);
  }
  return r;
}

bool panel_is_lit(const SpaceTimePoint& x, const Panel& p) {
  const ConeRange r = cone_range(x, p);
  const double tol = lit_tolerance(x, p.diameter());
  return r.min <= tol && r.max >= -tol;
}

LitSet lit_set(const ClusterTree& tree, const SpaceTimeMesh& m, const SpaceTimePoint& x) {
  LitSet out;
  for (std::size_t i : approximate_lit_leaves(tree, x))
    if (panel_is_lit(x, m.panel(i))) out.push_back(i);
  return out;
}

LitSet naive_lit_set(const SpaceTimeMesh& m, const SpaceTimePoint& x) {
  LitSet out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (panel_is_lit(x, m.panel(i))) out.push_back(i);
  return out;
}

}  // namespace stbem
