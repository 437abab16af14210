#include "stbem/st_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace stbem {

Vec3 SurfaceMesh::normal(std::size_t tri) const {
  const auto& t = triangles[tri];
  const Vec3 n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
  return n.normalized();
}

double SurfaceMesh::area(std::size_t tri) const {
  const auto& t = triangles[tri];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

double SurfaceMesh::total_area() const {
  double a = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) a += area(i);
  return a;
}

SurfaceMesh cube_surface(int level) {
  if (level < 0) throw MeshError("cube_surface: negative level");
  const int n = 1 << level;
  SurfaceMesh s;
  s.kind = SurfaceKind::cube;
  s.level = level;
  std::map<std::tuple<int, int, int>, int> index;
  auto vertex = [&](int i, int j, int k) {
    auto key = std::make_tuple(i, j, k);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    const int id = static_cast<int>(s.vertices.size());
    s.vertices.emplace_back(double(i) / n - 0.5, double(j) / n - 0.5, double(k) / n - 0.5);
    index.emplace(key, id);
    return id;
  };
  for (int axis = 0; axis < 3; ++axis) {
    for (int side = 0; side < 2; ++side) {
      const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
      auto at = [&](int u, int v) {
        std::array<int, 3> c{};
        c[axis] = side * n;
        c[a1] = u;
        c[a2] = v;
        return vertex(c[0], c[1], c[2]);
      };
      Vec3 outward = Vec3::Zero();
      outward[axis] = side == 0 ? -1.0 : 1.0;
      for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
          const int p00 = at(u, v), p10 = at(u + 1, v), p01 = at(u, v + 1), p11 = at(u + 1, v + 1);
          for (std::array<int, 3> t : {std::array<int, 3>{p00, p10, p11}, std::array<int, 3>{p00, p11, p01}}) {
            const Vec3 nt = (s.vertices[t[1]] - s.vertices[t[0]]).cross(s.vertices[t[2]] - s.vertices[t[0]]);
            if (nt.dot(outward) < 0.0) std::swap(t[1], t[2]);
            s.triangles.push_back(t);
          }
        }
      }
    }
  }
  return s;
}

SurfaceMesh sphere_surface(int level) {
  if (level < 0) throw MeshError("sphere_surface: negative level");
  SurfaceMesh s;
  s.kind = SurfaceKind::sphere;
  s.level = level;
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  const double raw[12][3] = {{-1, g, 0}, {1, g, 0},  {-1, -g, 0}, {1, -g, 0}, {0, -1, g},  {0, 1, g},
                             {0, -1, -g}, {0, 1, -g}, {g, 0, -1},  {g, 0, 1},  {-g, 0, -1}, {-g, 0, 1}};
  for (const auto& r : raw) s.vertices.push_back(Vec3(r[0], r[1], r[2]).normalized());
  s.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
                 {11, 10, 2}, {10, 7, 6}, {7, 1, 8},   {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
                 {3, 8, 9},   {4, 9, 5},  {2, 4, 11},  {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      auto key = std::minmax(a, b);
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      const int id = static_cast<int>(s.vertices.size());
      s.vertices.push_back((s.vertices[a] + s.vertices[b]).normalized());
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(4 * s.triangles.size());
    for (const auto& t : s.triangles) {
      const int ab = midpoint(t[0], t[1]), bc = midpoint(t[1], t[2]), ca = midpoint(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({t[1], bc, ab});
      next.push_back({t[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    s.triangles = std::move(next);
  }
  for (auto& t : s.triangles) {
    const Vec3 c = s.vertices[t[0]] + s.vertices[t[1]] + s.vertices[t[2]];
    const Vec3 nt = (s.vertices[t[1]] - s.vertices[t[0]]).cross(s.vertices[t[2]] - s.vertices[t[0]]);
    if (nt.dot(c) < 0.0) std::swap(t[1], t[2]);
  }
  return s;
}

SpaceTimeMesh::SpaceTimeMesh(std::vector<Vec4> vertices, std::vector<std::array<int, 4>> panels, double T)
    : vertices_(std::move(vertices)), panels_(std::move(panels)), T_(T) {
  geometry_.reserve(panels_.size());
  for (const auto& p : panels_) {
    std::array<Vec4, 4> v;
    for (int k = 0; k < 4; ++k) {
      if (p[k] < 0 || std::size_t(p[k]) >= vertices_.size()) throw MeshError("panel vertex index out of range");
      v[k] = vertices_[p[k]];
    }
    geometry_.push_back(panel_from_vertices(v));
  }
  v1_dof_.assign(vertices_.size(), -1);
  for (std::size_t i = 0; i < vertices_.size(); ++i)
    if (vertices_[i][0] > 0.0) v1_dof_[i] = static_cast<int>(v1_count_++);
  slab_ = detect_slab_structure(vertices_, panels_, T_);
}

double SpaceTimeMesh::mesh_size() const {
  double h = 0.0;
  for (const auto& p : geometry_) h = std::max(h, p.diameter());
  return h;
}

SpaceTimeMesh extrude_spacetime(const SurfaceMesh& surface, double T, int slabs) {
  if (slabs < 1) throw MeshError("extrude_spacetime: need at least one slab");
  if (!(T > 0.0)) throw MeshError("extrude_spacetime: T must be positive");
  const int nv = static_cast<int>(surface.vertices.size());
  std::vector<Vec4> vertices;
  vertices.reserve(std::size_t(nv) * (slabs + 1));
  for (int k = 0; k <= slabs; ++k) {
    const double t = T * k / slabs;
    for (const auto& x : surface.vertices) {
      Vec4 v;
      v << t, x;
      vertices.push_back(v);
    }
  }
  std::vector<std::array<int, 4>> panels;
  panels.reserve(3 * surface.triangles.size() * slabs);
  for (int k = 0; k < slabs; ++k) {
    for (std::size_t tri = 0; tri < surface.triangles.size(); ++tri) {
      auto s = surface.triangles[tri];
      const Vec3 outward = surface.normal(tri);
      std::sort(s.begin(), s.end());
      auto lo = [&](int i) { return k * nv + s[i]; };
      auto hi = [&](int i) { return (k + 1) * nv + s[i]; };
      const std::array<std::array<int, 4>, 3> tets = {{{lo(0), lo(1), lo(2), hi(2)},
                                                       {lo(0), lo(1), hi(1), hi(2)},
                                                       {lo(0), hi(0), hi(1), hi(2)}}};
      for (auto t : tets) {
        std::array<Vec4, 4> v;
        for (int j = 0; j < 4; ++j) v[j] = vertices[t[j]];
        if (panel_from_vertices(v).spatial_normal().dot(outward) < 0.0) std::swap(t[2], t[3]);
        panels.push_back(t);
      }
    }
  }
  SpaceTimeMesh mesh(std::move(vertices), std::move(panels), T);
  mesh.set_origin({surface.kind, surface.level, slabs});
  return mesh;
}

SpaceTimeMesh make_mesh(SurfaceKind kind, int level, double T, int slabs) {
  switch (kind) {
    case SurfaceKind::cube:
      return extrude_spacetime(cube_surface(level), T, slabs);
    case SurfaceKind::sphere:
      return extrude_spacetime(sphere_surface(level), T, slabs);
    case SurfaceKind::custom:
      break;
  }
  throw MeshError("make_mesh: custom surfaces have no generator");
}

SpaceTimeMesh refine(const SpaceTimeMesh& mesh) {
  const auto& o = mesh.origin();
  if (!o || o->kind == SurfaceKind::custom) throw MeshError("refine: mesh has no generator");
  return make_mesh(o->kind, o->level + 1, mesh.end_time(), 2 * o->slabs);
}

std::optional<SlabStructure> detect_slab_structure(const std::vector<Vec4>& vertices,
                                                   const std::vector<std::array<int, 4>>& panels,
                                                   double T) {
  if (panels.empty() || !(T > 0.0)) return std::nullopt;
  // slab 0 ends at the smallest positive panel time extent
  double dt = T;
  for (const auto& p : panels) {
    double lo = vertices[p[0]][0], hi = lo;
    for (int k = 1; k < 4; ++k) {
      lo = std::min(lo, vertices[p[k]][0]);
      hi = std::max(hi, vertices[p[k]][0]);
    }
    if (hi - lo > 0.0) dt = std::min(dt, hi - lo);
  }
  const double ratio = T / dt;
  const int slabs = static_cast<int>(std::lround(ratio));
  if (slabs < 1 || std::abs(ratio - slabs) > 1e-9 * ratio) return std::nullopt;
  if (panels.size() % slabs != 0) return std::nullopt;
  const std::size_t per = panels.size() / slabs;
  const double tol = 1e-12 * std::max(1.0, T);
  for (std::size_t i = 0; i < per; ++i) {
    for (int k = 1; k < slabs; ++k) {
      const auto& a = panels[i];
      const auto& b = panels[k * per + i];
      for (int j = 0; j < 4; ++j) {
        Vec4 shift = vertices[a[j]];
        shift[0] += k * dt;
        if ((shift - vertices[b[j]]).lpNorm<Eigen::Infinity>() > tol) return std::nullopt;
      }
    }
    for (int j = 0; j < 4; ++j) {
      const double t = vertices[panels[i][j]][0];
      if (t < -tol || t > dt + tol) return std::nullopt;
    }
  }
  return SlabStructure{slabs, per, dt};
}

void check_conformity(const SpaceTimeMesh& mesh) {
  std::map<std::array<int, 3>, int> count;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto& p = mesh.panel_vertices(i);
    for (int f = 0; f < 4; ++f) {
      std::array<int, 3> face{};
      int c = 0;
      for (int j = 0; j < 4; ++j)
        if (j != f) face[c++] = p[j];
      std::sort(face.begin(), face.end());
      ++count[face];
    }
  }
  const double T = mesh.end_time();
  const double tol = 1e-12 * std::max(1.0, T);
  for (const auto& [face, n] : count) {
    if (n > 2) throw MeshError("check_conformity: face shared by more than two panels");
    if (n == 1) {
      const double t0 = mesh.vertices()[face[0]][0];
      bool flat = true;
      for (int v : face) flat = flat && std::abs(mesh.vertices()[v][0] - t0) <= tol;
      const bool on_end = std::abs(t0) <= tol || std::abs(t0 - T) <= tol;
      if (!flat || !on_end) throw MeshError("check_conformity: hanging face inside the time interval");
    }
  }
}

void write_mesh(std::ostream& out, const SpaceTimeMesh& mesh) {
  out.precision(17);
  out << "ST-MESH v1 " << mesh.vertices().size() << ' ' << mesh.size() << ' ' << mesh.end_time() << '\n';
  for (const auto& v : mesh.vertices()) out << v[0] << ' ' << v[1] << ' ' << v[2] << ' ' << v[3] << '\n';
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto& p = mesh.panel_vertices(i);
    out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << p[3] << '\n';
  }
  if (const auto& o = mesh.origin())
    out << "# origin " << to_string(o->kind) << ' ' << o->level << ' ' << o->slabs << '\n';
}

SpaceTimeMesh read_mesh(std::istream& in) {
  std::string magic, version;
  std::size_t nv = 0, np = 0;
  double T = 0.0;
  if (!(in >> magic >> version >> nv >> np >> T) || magic != "ST-MESH" || version != "v1")
    throw MeshError("read_mesh: bad header");
  std::vector<Vec4> vertices(nv);
  for (auto& v : vertices)
    if (!(in >> v[0] >> v[1] >> v[2] >> v[3])) throw MeshError("read_mesh: truncated vertex list");
  std::vector<std::array<int, 4>> panels(np);
  for (auto& p : panels)
    if (!(in >> p[0] >> p[1] >> p[2] >> p[3])) throw MeshError("read_mesh: truncated panel list");
  SpaceTimeMesh mesh(std::move(vertices), std::move(panels), T);
  std::string hash, word, kind;
  if (in >> hash >> word && hash == "#" && word == "origin") {
    MeshOrigin o;
    if (in >> kind >> o.level >> o.slabs) {
      o.kind = surface_kind_from_string(kind);
      mesh.set_origin(o);
    }
  }
  return mesh;
}

void write_mesh_file(const std::string& path, const SpaceTimeMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open " + path);
  write_mesh(out, mesh);
}

SpaceTimeMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path);
  return read_mesh(in);
}

std::string to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::cube:
      return "cube";
    case SurfaceKind::sphere:
      return "sphere";
    case SurfaceKind::custom:
      return "custom";
  }
  return "custom";
}

SurfaceKind surface_kind_from_string(const std::string& s) {
  if (s == "cube") return SurfaceKind::cube;
  if (s == "sphere") return SurfaceKind::sphere;
  if (s == "custom") return SurfaceKind::custom;
  throw ConfigError("unknown surface kind: " + s);
}

}  // namespace stbem
