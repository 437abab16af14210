// Surface triangulations and their extrusion into tetrahedral meshes of
// (0, T) x Gamma.
#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stbem/geometry.hpp"

namespace stbem {

enum class SurfaceKind { cube, sphere, custom };

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise seen from outside
  SurfaceKind kind = SurfaceKind::custom;
  int level = 0;

  Vec3 normal(std::size_t tri) const;
  double area(std::size_t tri) const;
  double total_area() const;
};

// Boundary of (-1/2, 1/2)^3; 2 * 4^level triangles per face.
SurfaceMesh cube_surface(int level);
// Icosahedron subdivided `level` times, vertices on the unit sphere.
SurfaceMesh sphere_surface(int level);

// Panels of slab k occupy indices [k * panels_per_slab, (k+1) * panels_per_slab)
// and are time translates of the panels of slab 0.
struct SlabStructure {
  int slabs = 0;
  std::size_t panels_per_slab = 0;
  double dt = 0.0;
};

struct MeshOrigin {
  SurfaceKind kind = SurfaceKind::custom;
  int level = 0;
  int slabs = 0;
};

enum class FESpace { S0, V1 };

class SpaceTimeMesh {
 public:
  SpaceTimeMesh() = default;
  SpaceTimeMesh(std::vector<Vec4> vertices, std::vector<std::array<int, 4>> panels, double T);

  std::size_t size() const { return panels_.size(); }
  double end_time() const { return T_; }
  const std::vector<Vec4>& vertices() const { return vertices_; }
  const std::array<int, 4>& panel_vertices(std::size_t i) const { return panels_[i]; }
  const Panel& panel(std::size_t i) const { return geometry_[i]; }
  const std::vector<Panel>& panels() const { return geometry_; }

  // Largest panel diameter in R^4.
  double mesh_size() const;

  const std::optional<SlabStructure>& slab_structure() const { return slab_; }
  const std::optional<MeshOrigin>& origin() const { return origin_; }
  void set_origin(const MeshOrigin& o) { origin_ = o; }

  // V1 degrees of freedom: vertices with t > 0; -1 for vertices at t = 0.
  const std::vector<int>& v1_dofs() const { return v1_dof_; }
  std::size_t v1_size() const { return v1_count_; }
  std::size_t dimension(FESpace s) const { return s == FESpace::S0 ? size() : v1_size(); }

 private:
  std::vector<Vec4> vertices_;
  std::vector<std::array<int, 4>> panels_;
  std::vector<Panel> geometry_;
  double T_ = 0.0;
  std::optional<SlabStructure> slab_;
  std::optional<MeshOrigin> origin_;
  std::vector<int> v1_dof_;
  std::size_t v1_count_ = 0;
};

SpaceTimeMesh extrude_spacetime(const SurfaceMesh& surface, double T, int slabs);

// Regenerates the mesh from the next surface level with twice the slabs.
SpaceTimeMesh refine(const SpaceTimeMesh& mesh);

SpaceTimeMesh make_mesh(SurfaceKind kind, int level, double T, int slabs);

// Returns the slab decomposition if the panel list is slab-major with time
// translated copies of the first slab.
std::optional<SlabStructure> detect_slab_structure(const std::vector<Vec4>& vertices,
                                                   const std::vector<std::array<int, 4>>& panels,
                                                   double T);

// Throws MeshError unless every face is shared by two panels or lies on t = 0 / t = T.
void check_conformity(const SpaceTimeMesh& mesh);

void write_mesh(std::ostream& out, const SpaceTimeMesh& mesh);
SpaceTimeMesh read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const SpaceTimeMesh& mesh);
SpaceTimeMesh read_mesh_file(const std::string& path);

std::string to_string(SurfaceKind k);
SurfaceKind surface_kind_from_string(const std::string& s);

}  // namespace stbem
