// Reference solutions, error measures and the three numerical experiments:
// lit-panel scaling, Kirchhoff quadrature checks and BEM convergence.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stbem/retarded_ops.hpp"

namespace stbem {

// u(t, x) = mu(t - |x - y_S|) / |x - y_S| with causal mu.
struct SphericalWave {
  Vec3 source = Vec3(-0.1, -0.2, -0.3);
  std::function<double(double)> mu;
  std::function<double(double)> dmu;

  double value(const Vec4& y) const;
  double dt(const Vec4& y) const;
  Vec3 gradient(const Vec4& y) const;
  double normal_derivative(const Vec4& y, const Vec3& n) const { return gradient(y).dot(n); }
  CauchyData cauchy() const;
};

// exp(1 / (t^2/4 - t)) on (0, 4).
SphericalWave bump_wave();
// t^3 exp(-t) for t > 0.
SphericalWave cubic_wave();

// g0(t) Re Y_1^0(x) with g0(t) = t^4 exp(-2t).
double sphere_dirichlet(const Vec4& y);
double real_y10(const Vec3& x);

// Tabulated w0(t) for the sphere density w0(t) Re Y_1^0(x); two columns t,w0.
struct TimeTable {
  std::vector<double> t, v;
  double operator()(double s) const;  // linear interpolation, 0 before the first node
};
TimeTable read_time_table(const std::string& path);

// Exact density depending on the panel (normal derivatives jump at edges).
using PanelFunction = std::function<double(const Vec4&, const Panel&)>;

// ||w - w_h||_{L2(Sigma)} and ||w|| with the degree-5 volume rule.
struct L2Errors {
  double abs = 0.0;
  double norm = 0.0;
  double best = 0.0;  // ||w - P0 w|| with P0 the panel averages
};
L2Errors l2_errors(const PanelFunction& w, const Density& w_h, const SpaceTimeMesh& m);

// Vertices, edge midpoints and face centers of [-a, a]^3.
std::vector<Vec3> cube_points26(double a = 0.6);
double mean_relative_error(const std::vector<double>& exact, const std::vector<double>& approx);

// Observed orders log(e_i / e_{i+1}) / log(h_i / h_{i+1}).
std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& e);
// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct RunConfig {
  std::string experiment = "exp3";
  SurfaceKind geometry = SurfaceKind::cube;
  double T = 4.0;
  std::vector<int> levels{0, 1, 2};
  std::vector<int> slabs{2, 4, 8};
  QuadConfig inner{7, 8};
  int m_Q = 3;
  int n_min = 50;
  // exp1
  std::vector<int> n_min_list{1, 5, 50};
  int timing_runs = 5;
  // exp2
  std::vector<double> distances{0.0, 0.1, 1.0, 3.0};
  std::vector<int> r_max_list{10, 20};
  std::vector<int> n_gauss_list{2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::vector<int> average_r_max_list{7, 14};
  int average_slabs = 8;
  double corner_solid_angle = 0.125;  // interior solid-angle fraction of a cube vertex
  // exp3
  std::string method = "direct";  // direct, indirect or both
  std::string w0_table;           // optional reference for the sphere
  std::string out_dir = ".";
};

RunConfig default_config(const std::string& experiment);
// Overrides fields of base with the keys present in the JSON text.
RunConfig parse_run_config(const std::string& json_text, RunConfig base);
std::string to_json(const RunConfig& cfg);

SpaceTimeMesh level_mesh(const RunConfig& cfg, std::size_t i);

// Experiment 1
struct LitRow {
  std::string geometry;
  int level = 0;
  std::size_t N = 0;
  std::string point;
  int n_min = 0;
  std::size_t lit = 0;
  std::size_t proxy = 0;
  double t_naive = 0.0;  // seconds, min over runs
  double t_tree = 0.0;
};
std::vector<LitRow> run_experiment1(const RunConfig& cfg);

// Experiment 2
struct PointwiseRow {
  double d = 0.0;
  int r_max = 0;
  int n_gauss = 0;
  double exact = 0.0;
  double approx = 0.0;
  double error = 0.0;
  double jump = 0.0;  // J used on the boundary, 0 off the boundary
};
struct AverageRow {
  int r_max = 0;
  int n_gauss = 0;
  std::size_t N = 0;
  double error = 0.0;
};
struct Exp2Result {
  std::vector<PointwiseRow> pointwise;
  std::vector<AverageRow> average;
  // (u - D g + S w) / u at the corner point with the finest settings
  double corner_jump_estimate = 0.0;
};
std::vector<PointwiseRow> pointwise_errors(const RunConfig& cfg, const std::vector<int>& r_max_list,
                                           const std::vector<int>& n_gauss_list, double* corner_jump = nullptr);
std::vector<AverageRow> average_errors(const RunConfig& cfg, const std::vector<int>& r_max_list,
                                       const std::vector<int>& n_gauss_list);
Exp2Result run_experiment2(const RunConfig& cfg);

// Experiment 3
struct BemRow {
  std::string method;
  int level = 0;
  std::size_t N = 0;
  double h = 0.0;
  std::optional<double> e_abs, e_bem, e_opt;
  std::optional<double> e_field;  // mean relative error at the 26 points
  double residual = 0.0;
  double rcond = 0.0;
  double seconds = 0.0;
};
struct FieldRow {
  std::string method;
  int level = 0;
  Vec3 x = Vec3::Zero();
  double exact = 0.0;
  double approx = 0.0;
};
struct Exp3Result {
  std::vector<BemRow> rows;
  std::vector<FieldRow> field;
};
Exp3Result run_experiment3(const RunConfig& cfg);

// CSV writers; each file starts with "# config: <json>".
void write_lit_csv(const std::string& dir, const RunConfig& cfg, const std::vector<LitRow>& rows);
void write_exp2_csv(const std::string& dir, const RunConfig& cfg, const Exp2Result& r);
void write_exp3_csv(const std::string& dir, const RunConfig& cfg, const Exp3Result& r);

}  // namespace stbem
