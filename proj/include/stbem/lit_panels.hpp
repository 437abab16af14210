// Panels intersected by the backward light cone of an apex, found through a
// cluster tree of bounding balls in R^4.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stbem/geometry.hpp"
#include "stbem/st_mesh.hpp"

namespace stbem {

struct ClusterNode {
  BoundingBall ball;
  std::size_t begin = 0;  // range in ClusterTree::order
  std::size_t end = 0;
  int left = -1;
  int right = -1;
  bool leaf() const { return left < 0; }
};

struct ClusterTree {
  std::vector<ClusterNode> nodes;  // nodes[0] is the root
  std::vector<std::size_t> order;  // panel indices, leaves are contiguous ranges
  int n_min = 0;
};

// Sorted panel indices.
using LitSet = std::vector<std::size_t>;

ClusterTree build_cluster_tree(const SpaceTimeMesh& m, int n_min);

// Ritter-type ball around all vertices of the given panels.
BoundingBall bounding_ball(const SpaceTimeMesh& m, std::span<const std::size_t> panels);
BoundingBall bounding_ball(std::span<const Vec4> points);

// Union of the panels of all leaves whose ball may meet the cone.
std::vector<std::size_t> approximate_lit_leaves(const ClusterTree& tree, const SpaceTimePoint& x);

struct ConeRange {
  double min = 0.0;
  double max = 0.0;
};
// Exact range of phi_xi(x - y) over the closed panel.
ConeRange cone_range(const SpaceTimePoint& x, const Panel& p);

bool panel_is_lit(const SpaceTimePoint& x, const Panel& p);

LitSet lit_set(const ClusterTree& tree, const SpaceTimeMesh& m, const SpaceTimePoint& x);
LitSet naive_lit_set(const SpaceTimeMesh& m, const SpaceTimePoint& x);

}  // namespace stbem
