// Retarded layer potentials, Galerkin matrices of the energetic bilinear
// forms, the L2 projection onto V1 and dense solves.
//
// Test functions are indicators of panels, so every matrix row i is
//   b_A(w, 1_i) = - sum over faces F of panel i of nu_t(F) int_F A w.
#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "stbem/cone_quadrature.hpp"
#include "stbem/lit_panels.hpp"
#include "stbem/st_mesh.hpp"

namespace stbem {

// Coefficients in S0 (one per panel) or V1 (one per vertex with t > 0).
struct Density {
  FESpace space = FESpace::S0;
  Eigen::VectorXd coeffs;

  static Density zero(const SpaceTimeMesh& m, FESpace s);
  // Throws ConfigError if the length does not match the mesh.
  void check(const SpaceTimeMesh& m) const;
};

PanelDensity restrict_to_panel(const Density& d, const SpaceTimeMesh& m, std::size_t panel);
// Pointwise value of a V1 density; y must lie on the mesh.
double evaluate_v1(const Density& d, const SpaceTimeMesh& m, const Vec4& y);

enum class Side { interior = -1, exterior = 1 };
inline double sign(Side s) { return s == Side::exterior ? 1.0 : -1.0; }

struct OperatorConfig {
  QuadConfig inner;
  int m_Q = 3;
  bool use_slab_structure = true;
};

double apply_Tk(const SpaceTimePoint& x, KernelId k, const Density& w, const SpaceTimeMesh& m,
                const ClusterTree& tree, const QuadConfig& cfg, bool time_derivative = false);
double single_layer(const SpaceTimePoint& x, const Density& w, const SpaceTimeMesh& m, const ClusterTree& tree,
                    const QuadConfig& cfg);
double double_layer(const SpaceTimePoint& x, const Density& v, const SpaceTimeMesh& m, const ClusterTree& tree,
                    const QuadConfig& cfg);

// Panels whose closure contains y (within a relative tolerance).
std::vector<std::size_t> panels_containing(const SpaceTimeMesh& m, const Vec4& y, double tol = 1e-12);

// Jump coefficient at y if y lies on the mesh: 1/2 when all panels through y
// are coplanar, the supplied value otherwise.  Throws GeometryError for an
// edge or corner point without a supplied value.  Empty if y is off the mesh.
std::optional<double> boundary_jump(const SpaceTimeMesh& m, const Vec4& y, std::optional<double> solid_angle);

// d (D g_h - S w_h)(x), plus J(x) g_h(x) when x lies on the mesh.
double kirchhoff_eval(const SpaceTimePoint& x, const Density& g_h, const Density& w_h, Side side,
                      const SpaceTimeMesh& m, const ClusterTree& tree, const QuadConfig& cfg,
                      std::optional<double> solid_angle = std::nullopt);

// Cauchy data given pointwise; the Neumann trace depends on the panel normal.
struct CauchyData {
  std::function<double(const Vec4&)> dirichlet;
  std::function<double(const Vec4&)> dirichlet_dt;
  std::function<double(const Vec4&, const Vec3&)> neumann;
};

// Same formula with exact data integrated directly over each lit panel.
double kirchhoff_eval(const SpaceTimePoint& x, const CauchyData& data, Side side, const SpaceTimeMesh& m,
                      const ClusterTree& tree, const QuadConfig& cfg, std::optional<double> solid_angle = std::nullopt);

struct AssemblyStats {
  std::size_t rows = 0;         // rows computed by quadrature
  std::size_t nodes = 0;        // outer nodes
  std::size_t inner_calls = 0;  // panel_moments evaluations
  bool translated = false;      // rows expanded from the last slab
};

// V (N x N) for b_V and, if requested, K (N x #V1) for b_K.
struct GalerkinOperators {
  Eigen::MatrixXd V;
  Eigen::MatrixXd K;
};

GalerkinOperators assemble_operators(const SpaceTimeMesh& m, const ClusterTree& tree, const OperatorConfig& cfg,
                                     bool with_K, AssemblyStats* stats = nullptr);
Eigen::MatrixXd assemble_bV(const SpaceTimeMesh& m, const ClusterTree& tree, const OperatorConfig& cfg);
Eigen::VectorXd assemble_bK(const Density& g_h, const SpaceTimeMesh& m, const ClusterTree& tree,
                            const OperatorConfig& cfg);

// b_Id(g, 1_i) for a function or a V1 density; the matrix form maps V1 coefficients.
Eigen::VectorXd assemble_bId(const std::function<double(const SpaceTimePoint&)>& g, const SpaceTimeMesh& m, int m_Q);
Eigen::VectorXd assemble_bId(const Density& g_h, const SpaceTimeMesh& m, int m_Q);
Eigen::MatrixXd identity_form(const SpaceTimeMesh& m, int m_Q);

// V1 mass matrix entries are exact; the right side uses the degree-5 rule.
Density project_Qh1(const std::function<double(const Vec4&)>& g, const SpaceTimeMesh& m);

struct SolveReport {
  double residual = 0.0;  // |A w - b| / |b|
  double rcond = 0.0;
};

// Dense LU with partial pivoting.  Throws SolverError on a singular matrix or
// a relative residual above 1e-10.
Eigen::VectorXd dense_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, SolveReport* report = nullptr);

Density solve_indirect(const std::function<double(const Vec4&)>& g, const SpaceTimeMesh& m, const ClusterTree& tree,
                       const OperatorConfig& cfg, SolveReport* report = nullptr);
Density solve_direct(const std::function<double(const Vec4&)>& g, const SpaceTimeMesh& m, const ClusterTree& tree,
                     const OperatorConfig& cfg, Side side, SolveReport* report = nullptr);
// Right side -d/2 b_Id(g_h) + b_K(g_h) from assembled operators.
Eigen::VectorXd direct_rhs(const GalerkinOperators& ops, const Eigen::MatrixXd& id_form, const Density& g_h,
                           Side side);

// Row-major CSV with a "# rows cols" header line.
void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& A);
Eigen::MatrixXd read_matrix_csv(std::istream& in);
void write_density_csv(std::ostream& out, const Density& d);
Density read_density_csv(std::istream& in);

}  // namespace stbem
