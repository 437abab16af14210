#include "stbem/retarded_ops.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <Eigen/Sparse>

#include "stbem/outer_quad.hpp"

namespace stbem {

namespace {

using FaceKey = std::array<int, 3>;

// Outer faces of the given rows with nonzero nu_t, keyed by vertex ids so
// that a face shared by two rows is integrated once.
std::map<FaceKey, std::vector<std::pair<std::size_t, double>>> row_faces(const SpaceTimeMesh& m,
                                                                         const std::vector<std::size_t>& rows) {
  std::map<FaceKey, std::vector<std::pair<std::size_t, double>>> faces;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Panel& p = m.panel(rows[r]);
    const auto& ids = m.panel_vertices(rows[r]);
    for (const auto& f : p.faces) {
      const double nu_t = f.conormal[0];
      if (std::abs(nu_t) < 1e-14) continue;
      FaceKey key{ids[f.vertices[0]], ids[f.vertices[1]], ids[f.vertices[2]]};
      std::sort(key.begin(), key.end());
      faces[key].emplace_back(r, nu_t);
    }
  }
  return faces;
}

// Number of vertices per time layer if vertex i + nv is vertex i shifted by
// one slab; 0 otherwise.
std::size_t layer_size(const SpaceTimeMesh& m, const SlabStructure& s) {
  const auto& v = m.vertices();
  if (v.size() % (s.slabs + 1) != 0) return 0;
  const std::size_t nv = v.size() / (s.slabs + 1);
  for (std::size_t i = 0; i + nv < v.size(); ++i) {
    const Vec4 d = v[i + nv] - v[i];
    if (std::abs(d[0] - s.dt) > 1e-12 * std::max(1.0, s.dt) || d.tail<3>().norm() > 1e-12) return 0;
  }
  return nv;
}

void compute_rows(const SpaceTimeMesh& m, const ClusterTree& tree, const OperatorConfig& cfg, bool with_K,
                  const std::vector<std::size_t>& rows, Eigen::MatrixXd& V, Eigen::MatrixXd& K,
                  AssemblyStats& stats) {
  V.setZero(rows.size(), m.size());
  if (with_K) K.setZero(rows.size(), m.v1_size());
  const auto& dofs = m.v1_dofs();
  const double cells = double(cfg.m_Q) * cfg.m_Q;
  for (const auto& [key, adj] : row_faces(m, rows)) {
    const Vec4 &a = m.vertices()[key[0]], &b = m.vertices()[key[1]], &c = m.vertices()[key[2]];
    const double w = triangle_area(a, b, c) / cells;
    for (const Vec4& y : subtriangle_centroids(a, b, c, cfg.m_Q)) {
      const SpaceTimePoint x(y);
      ++stats.nodes;
      for (std::size_t j : lit_set(tree, m, x)) {
        const PanelMoments mo = panel_moments(x, m.panel(j), cfg.inner);
        ++stats.inner_calls;
        const auto& G = m.panel(j).barycentric_gradients();
        const auto& ids = m.panel_vertices(j);
        for (const auto& [r, nu_t] : adj) {
          const double s = -nu_t * w;
          V(r, j) += s * mo.k1;
          if (!with_K) continue;
          for (int v = 0; v < 4; ++v) {
            const int d = dofs[ids[v]];
            if (d >= 0) K(r, d) += s * (mo.k3[v] + G(v, 0) * mo.k2);
          }
        }
      }
    }
  }
  stats.rows += rows.size();
}

}  // namespace

Density Density::zero(const SpaceTimeMesh& m, FESpace s) {
  return {s, Eigen::VectorXd::Zero(Eigen::Index(m.dimension(s)))};
}

void Density::check(const SpaceTimeMesh& m) const {
  if (std::size_t(coeffs.size()) != m.dimension(space))
    throw ConfigError("density length " + std::to_string(coeffs.size()) + " does not match the space dimension " +
                      std::to_string(m.dimension(space)));
}

PanelDensity restrict_to_panel(const Density& d, const SpaceTimeMesh& m, std::size_t panel) {
  if (d.space == FESpace::S0) return PanelDensity::constant(d.coeffs[Eigen::Index(panel)]);
  std::array<double, 4> vals{};
  const auto& ids = m.panel_vertices(panel);
  for (int v = 0; v < 4; ++v) {
    const int dof = m.v1_dofs()[ids[v]];
    vals[v] = dof >= 0 ? d.coeffs[dof] : 0.0;
  }
  return PanelDensity::affine(vals);
}

std::vector<std::size_t> panels_containing(const SpaceTimeMesh& m, const Vec4& y, double tol) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Panel& p = m.panel(i);
    const double scale = std::max(1.0, p.diameter());
    if (std::abs((y - p.vertices[0]).dot(p.normal)) > tol * scale) continue;
    const auto lam = p.barycentric(y);
    if (std::all_of(lam.begin(), lam.end(), [&](double l) { return l >= -tol * scale; })) out.push_back(i);
  }
  return out;
}

double evaluate_v1(const Density& d, const SpaceTimeMesh& m, const Vec4& y) {
  if (d.space != FESpace::V1) throw ConfigError("evaluate_v1: density is not in V1");
  const auto on = panels_containing(m, y);
  if (on.empty()) throw GeometryError("evaluate_v1: point is not on the mesh");
  return restrict_to_panel(d, m, on.front())(m.panel(on.front()), y);
}

std::optional<double> boundary_jump(const SpaceTimeMesh& m, const Vec4& y, std::optional<double> solid_angle) {
  const auto on = panels_containing(m, y);
  if (on.empty()) return std::nullopt;
  const Vec4 n0 = m.panel(on.front()).normal;
  const bool flat =
      std::all_of(on.begin(), on.end(), [&](std::size_t i) { return (m.panel(i).normal - n0).norm() < 1e-10; });
  if (flat) return 0.5;
  if (!solid_angle) throw GeometryError("boundary_jump: point on an edge or corner needs a solid angle");
  return solid_angle;
}

double apply_Tk(const SpaceTimePoint& x, KernelId k, const Density& w, const SpaceTimeMesh& m,
                const ClusterTree& tree, const QuadConfig& cfg, bool time_derivative) {
  w.check(m);
  if (time_derivative && w.space != FESpace::V1) throw ConfigError("apply_Tk: time derivative needs a V1 density");
  double sum = 0.0;
  for (std::size_t j : lit_set(tree, m, x)) {
    const Panel& p = m.panel(j);
    PanelDensity d = restrict_to_panel(w, m, j);
    if (time_derivative) d = d.time_derivative(p);
    sum += inner_integral(x, p, k, d, cfg);
  }
  return sum;
}

double single_layer(const SpaceTimePoint& x, const Density& w, const SpaceTimeMesh& m, const ClusterTree& tree,
                    const QuadConfig& cfg) {
  return apply_Tk(x, KernelId::K1, w, m, tree, cfg);
}

double double_layer(const SpaceTimePoint& x, const Density& v, const SpaceTimeMesh& m, const ClusterTree& tree,
                    const QuadConfig& cfg) {
  if (v.space != FESpace::V1) throw ConfigError("double_layer: density must be in V1");
  return apply_Tk(x, KernelId::K3, v, m, tree, cfg) + apply_Tk(x, KernelId::K2, v, m, tree, cfg, true);
}

double kirchhoff_eval(const SpaceTimePoint& x, const Density& g_h, const Density& w_h, Side side,
                      const SpaceTimeMesh& m, const ClusterTree& tree, const QuadConfig& cfg,
                      std::optional<double> solid_angle) {
  g_h.check(m);
  w_h.check(m);
  if (g_h.space != FESpace::V1 || w_h.space != FESpace::S0)
    throw ConfigError("kirchhoff_eval: expects g_h in V1 and w_h in S0");
  const auto jump = boundary_jump(m, x.vec(), solid_angle);
  const auto& dofs = m.v1_dofs();
  double sum = 0.0;
  for (std::size_t j : lit_set(tree, m, x)) {
    const PanelMoments mo = panel_moments(x, m.panel(j), cfg);
    const auto& G = m.panel(j).barycentric_gradients();
    const auto& ids = m.panel_vertices(j);
    double d = 0.0;
    for (int v = 0; v < 4; ++v) {
      const int dof = dofs[ids[v]];
      if (dof >= 0) d += g_h.coeffs[dof] * (mo.k3[v] + G(v, 0) * mo.k2);
    }
    sum += d - w_h.coeffs[Eigen::Index(j)] * mo.k1;
  }
  double u = sign(side) * sum;
  if (jump) u += *jump * evaluate_v1(g_h, m, x.vec());
  return u;
}

double kirchhoff_eval(const SpaceTimePoint& x, const CauchyData& data, Side side, const SpaceTimeMesh& m,
                      const ClusterTree& tree, const QuadConfig& cfg, std::optional<double> solid_angle) {
  const auto jump = boundary_jump(m, x.vec(), solid_angle);
  double sum = 0.0;
  for (std::size_t j : lit_set(tree, m, x)) {
    const Panel& p = m.panel(j);
    const Vec3 n = p.spatial_normal();
    sum += inner_integral_sum(
        x, p,
        [&](const Vec4& y) {
          return std::array<double, 3>{-data.neumann(y, n), data.dirichlet_dt(y), data.dirichlet(y)};
        },
        cfg);
  }
  double u = sign(side) * sum;
  if (jump) u += *jump * data.dirichlet(x.vec());
  return u;
}

GalerkinOperators assemble_operators(const SpaceTimeMesh& m, const ClusterTree& tree, const OperatorConfig& cfg,
                                     bool with_K, AssemblyStats* stats) {
  if (cfg.m_Q < 1) throw ConfigError("assemble_operators: m_Q must be positive");
  AssemblyStats local;
  GalerkinOperators ops;
  const auto& slab = m.slab_structure();
  const std::size_t nv = slab && cfg.use_slab_structure ? layer_size(m, *slab) : 0;
  if (nv == 0) {
    std::vector<std::size_t> rows(m.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    compute_rows(m, tree, cfg, with_K, rows, ops.V, ops.K, local);
  } else {
    // rows of slab a equal the last slab's rows shifted by S - 1 - a slabs
    const std::size_t P = slab->panels_per_slab;
    const int S = slab->slabs;
    std::vector<std::size_t> rows(P);
    for (std::size_t i = 0; i < P; ++i) rows[i] = (S - 1) * P + i;
    Eigen::MatrixXd Vl, Kl;
    compute_rows(m, tree, cfg, with_K, rows, Vl, Kl, local);
    local.translated = true;
    ops.V.setZero(m.size(), m.size());
    for (int a = 0; a < S; ++a)
      for (int b = 0; b <= a; ++b)
        ops.V.block(a * P, b * P, P, P) = Vl.block(0, (S - 1 - a + b) * P, P, P);
    if (with_K) {
      const auto& dofs = m.v1_dofs();
      ops.K.setZero(m.size(), m.v1_size());
      for (std::size_t vtx = 0; vtx < dofs.size(); ++vtx) {
        if (dofs[vtx] < 0) continue;
        const int layer = int(vtx / nv);
        for (int a = 0; a < S; ++a) {
          const int shifted = layer + S - 1 - a;
          if (shifted > S) continue;
          const int src = dofs[std::size_t(shifted) * nv + vtx % nv];
          ops.K.block(a * P, dofs[vtx], P, 1) = Kl.col(src);
        }
      }
    }
  }
  if (stats) *stats = local;
  return ops;
}

Eigen::MatrixXd assemble_bV(const SpaceTimeMesh& m, const ClusterTree& tree, const OperatorConfig& cfg) {
  return assemble_operators(m, tree, cfg, false).V;
}

Eigen::VectorXd assemble_bK(const Density& g_h, const SpaceTimeMesh& m, const ClusterTree& tree,
                            const OperatorConfig& cfg) {
  g_h.check(m);
  if (g_h.space != FESpace::V1) throw ConfigError("assemble_bK: density must be in V1");
  return assemble_operators(m, tree, cfg, true).K * g_h.coeffs;
}

Eigen::VectorXd assemble_bId(const std::function<double(const SpaceTimePoint&)>& g, const SpaceTimeMesh& m, int m_Q) {
  Eigen::VectorXd b(Eigen::Index(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i) b[Eigen::Index(i)] = bilinear_entry(g, m.panel(i), boundary_rule(m.panel(i), m_Q));
  return b;
}

Eigen::MatrixXd identity_form(const SpaceTimeMesh& m, int m_Q) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(Eigen::Index(m.size()), Eigen::Index(m.v1_size()));
  const auto& dofs = m.v1_dofs();
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Panel& p = m.panel(i);
    const auto& ids = m.panel_vertices(i);
    for (const auto& f : boundary_rule(p, m_Q).faces) {
      if (f.skip) continue;
      for (std::size_t q = 0; q < f.nodes.size(); ++q) {
        const auto lam = p.barycentric(f.nodes[q]);
        for (int v = 0; v < 4; ++v) {
          const int d = dofs[ids[v]];
          if (d >= 0) B(Eigen::Index(i), d) -= f.nu_t * f.weights[q] * lam[v];
        }
      }
    }
  }
  return B;
}

Eigen::VectorXd assemble_bId(const Density& g_h, const SpaceTimeMesh& m, int m_Q) {
  g_h.check(m);
  if (g_h.space != FESpace::V1) throw ConfigError("assemble_bId: density must be in V1");
  return identity_form(m, m_Q) * g_h.coeffs;
}

Density project_Qh1(const std::function<double(const Vec4&)>& g, const SpaceTimeMesh& m) {
  const auto& dofs = m.v1_dofs();
  const VolumeRule& rule = tetrahedron_rule();
  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(Eigen::Index(m.v1_size()));
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Panel& p = m.panel(i);
    const auto& ids = m.panel_vertices(i);
    const double vol = p.volume();
    for (int a = 0; a < 4; ++a) {
      const int da = dofs[ids[a]];
      if (da < 0) continue;
      for (int c = 0; c < 4; ++c) {
        const int dc = dofs[ids[c]];
        if (dc >= 0) trip.emplace_back(da, dc, vol * (a == c ? 2.0 : 1.0) / 20.0);
      }
    }
    for (std::size_t q = 0; q < rule.weights.size(); ++q) {
      Vec4 y = Vec4::Zero();
      for (int k = 0; k < 4; ++k) y += rule.bary[q][k] * p.vertices[k];
      const double gy = g(y) * rule.weights[q] * vol;
      for (int a = 0; a < 4; ++a) {
        const int da = dofs[ids[a]];
        if (da >= 0) b[da] += gy * rule.bary[q][a];
      }
    }
  }
  Eigen::SparseMatrix<double> M(Eigen::Index(m.v1_size()), Eigen::Index(m.v1_size()));
  M.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw SolverError("project_Qh1: singular mass matrix");
  Density d{FESpace::V1, ldlt.solve(b)};
  const double bn = b.norm();
  if (bn > 0.0 && (M * d.coeffs - b).norm() > 1e-12 * bn) throw SolverError("project_Qh1: inaccurate mass solve");
  return d;
}

Eigen::VectorXd dense_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, SolveReport* report) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw SolverError("dense_solve: dimension mismatch");
  if (!A.allFinite() || !b.allFinite()) throw SolverError("dense_solve: non-finite system");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-16)) throw SolverError("dense_solve: singular matrix, rcond estimate " + std::to_string(rcond));
  const Eigen::VectorXd x = lu.solve(b);
  const double bn = b.norm();
  const double res = bn > 0.0 ? (A * x - b).norm() / bn : (A * x).norm();
  if (report) *report = {res, rcond};
  if (!(res <= 1e-10)) {
    std::ostringstream msg;
    msg << "dense_solve: relative residual " << res << " (rcond " << rcond << ")";
    throw SolverError(msg.str());
  }
  return x;
}

Density solve_indirect(const std::function<double(const Vec4&)>& g, const SpaceTimeMesh& m, const ClusterTree& tree,
                       const OperatorConfig& cfg, SolveReport* report) {
  const Eigen::MatrixXd V = assemble_bV(m, tree, cfg);
  const Eigen::VectorXd b = assemble_bId([&](const SpaceTimePoint& y) { return g(y.vec()); }, m, cfg.m_Q);
  return {FESpace::S0, dense_solve(V, b, report)};
}

Eigen::VectorXd direct_rhs(const GalerkinOperators& ops, const Eigen::MatrixXd& id_form, const Density& g_h,
                           Side side) {
  return -0.5 * sign(side) * (id_form * g_h.coeffs) + ops.K * g_h.coeffs;
}

Density solve_direct(const std::function<double(const Vec4&)>& g, const SpaceTimeMesh& m, const ClusterTree& tree,
                     const OperatorConfig& cfg, Side side, SolveReport* report) {
  const GalerkinOperators ops = assemble_operators(m, tree, cfg, true);
  const Density gh = project_Qh1(g, m);
  return {FESpace::S0, dense_solve(ops.V, direct_rhs(ops, identity_form(m, cfg.m_Q), gh, side), report)};
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& A) {
  out << "# " << A.rows() << ' ' << A.cols() << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << A(i, j);
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(std::istream& in) {
  std::string line;
  char hash = 0;
  Eigen::Index r = 0, c = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> hash >> r >> c) || hash != '#' || r < 0 || c < 0)
    throw ConfigError("read_matrix_csv: missing '# rows cols' header");
  Eigen::MatrixXd A(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    if (!std::getline(in, line)) throw ConfigError("read_matrix_csv: truncated data");
    std::istringstream row(line);
    std::string cell;
    for (Eigen::Index j = 0; j < c; ++j) {
      if (!std::getline(row, cell, ',')) throw ConfigError("read_matrix_csv: short row");
      A(i, j) = std::stod(cell);
    }
  }
  return A;
}

void write_density_csv(std::ostream& out, const Density& d) {
  out << "# " << (d.space == FESpace::S0 ? "S0" : "V1") << ' ' << d.coeffs.size() << '\n';
  out.precision(17);
  for (Eigen::Index i = 0; i < d.coeffs.size(); ++i) out << d.coeffs[i] << '\n';
}

Density read_density_csv(std::istream& in) {
  std::string line, space;
  char hash = 0;
  Eigen::Index n = 0;
  if (!std::getline(in, line) || !(std::istringstream(line) >> hash >> space >> n) || hash != '#' || n < 0 ||
      (space != "S0" && space != "V1"))
    throw ConfigError("read_density_csv: missing '# S0|V1 n' header");
  Density d{space == "S0" ? FESpace::S0 : FESpace::V1, Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw ConfigError("read_density_csv: truncated data");
    d.coeffs[i] = std::stod(line);
  }
  return d;
}

}  // namespace stbem
