#include "stbem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "stbem/outer_quad.hpp"

namespace stbem {

namespace {

using json = nlohmann::json;

double seconds_per_call(const std::function<void()>& f) {
  using clock = std::chrono::steady_clock;
  int reps = 1;
  for (;;) {
    const auto t0 = clock::now();
    for (int i = 0; i < reps; ++i) f();
    const double s = std::chrono::duration<double>(clock::now() - t0).count();
    if (s >= 2e-3 || reps >= (1 << 20)) return s / reps;
    reps *= 4;
  }
}

std::ofstream open_csv(const std::string& dir, const std::string& name, const RunConfig& cfg) {
  std::filesystem::create_directories(dir);
  std::ofstream out(std::filesystem::path(dir) / name);
  if (!out) throw ConfigError("cannot write " + name + " in " + dir);
  out << "# config: " << to_json(cfg) << '\n';
  out.precision(17);
  return out;
}

std::string opt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s.precision(17);
  s << *v;
  return s.str();
}

QuadConfig with_rule(QuadConfig q, int r_max, int n_gauss) {
  q.r_max = r_max;
  q.n_gauss = n_gauss;
  return q;
}

BemRow bem_row(const std::string& method, int level, const SpaceTimeMesh& m) {
  BemRow r;
  r.method = method;
  r.level = level;
  r.N = m.size();
  r.h = m.mesh_size();
  return r;
}

}  // namespace

double SphericalWave::value(const Vec4& y) const {
  const double r = (y.tail<3>() - source).norm();
  return mu(y[0] - r) / r;
}

double SphericalWave::dt(const Vec4& y) const {
  const double r = (y.tail<3>() - source).norm();
  return dmu(y[0] - r) / r;
}

Vec3 SphericalWave::gradient(const Vec4& y) const {
  const Vec3 d = y.tail<3>() - source;
  const double r = d.norm();
  const double s = y[0] - r;
  return (-dmu(s) / r - mu(s) / (r * r)) * d / r;
}

CauchyData SphericalWave::cauchy() const {
  return {[w = *this](const Vec4& y) { return w.value(y); }, [w = *this](const Vec4& y) { return w.dt(y); },
          [w = *this](const Vec4& y, const Vec3& n) { return w.normal_derivative(y, n); }};
}

SphericalWave bump_wave() {
  SphericalWave w;
  w.mu = [](double t) { return t > 0.0 && t < 4.0 ? std::exp(1.0 / (0.25 * t * t - t)) : 0.0; };
  w.dmu = [](double t) {
    if (!(t > 0.0 && t < 4.0)) return 0.0;
    const double q = 0.25 * t * t - t;
    return -std::exp(1.0 / q) * (0.5 * t - 1.0) / (q * q);
  };
  return w;
}

SphericalWave cubic_wave() {
  SphericalWave w;
  w.mu = [](double t) { return t > 0.0 ? t * t * t * std::exp(-t) : 0.0; };
  w.dmu = [](double t) { return t > 0.0 ? (3.0 * t * t - t * t * t) * std::exp(-t) : 0.0; };
  return w;
}

double real_y10(const Vec3& x) { return std::sqrt(0.75 / std::numbers::pi) * x[2] / x.norm(); }

double sphere_dirichlet(const Vec4& y) {
  const double t = y[0];
  return t > 0.0 ? std::pow(t, 4) * std::exp(-2.0 * t) * real_y10(y.tail<3>()) : 0.0;
}

double TimeTable::operator()(double s) const {
  if (t.empty() || s <= t.front()) return 0.0;
  if (s >= t.back()) return v.back();
  const auto it = std::upper_bound(t.begin(), t.end(), s);
  const std::size_t i = std::size_t(it - t.begin());
  const double a = (s - t[i - 1]) / (t[i] - t[i - 1]);
  return (1.0 - a) * v[i - 1] + a * v[i];
}

TimeTable read_time_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  TimeTable tab;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || !(std::isdigit(line[0]) || line[0] == '-' || line[0] == '.')) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream s(line);
    double a, b;
    if (!(s >> a >> b)) throw ConfigError("malformed row in " + path);
    if (!tab.t.empty() && !(a > tab.t.back())) throw ConfigError("times must increase in " + path);
    tab.t.push_back(a);
    tab.v.push_back(b);
  }
  if (tab.t.size() < 2) throw ConfigError("table " + path + " needs at least two rows");
  return tab;
}

L2Errors l2_errors(const PanelFunction& w, const Density& w_h, const SpaceTimeMesh& m) {
  w_h.check(m);
  if (w_h.space != FESpace::S0) throw ConfigError("l2_errors: expects an S0 density");
  const VolumeRule& r = tetrahedron_rule();
  double e2 = 0.0, n2 = 0.0, b2 = 0.0;
  std::vector<double> vals(r.weights.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Panel& p = m.panel(i);
    double avg = 0.0;
    for (std::size_t q = 0; q < r.weights.size(); ++q) {
      Vec4 y = Vec4::Zero();
      for (int k = 0; k < 4; ++k) y += r.bary[q][k] * p.vertices[k];
      vals[q] = w(y, p);
      avg += r.weights[q] * vals[q];
    }
    const double c = w_h.coeffs[Eigen::Index(i)];
    for (std::size_t q = 0; q < r.weights.size(); ++q) {
      const double wq = r.weights[q] * p.volume();
      e2 += wq * (vals[q] - c) * (vals[q] - c);
      n2 += wq * vals[q] * vals[q];
      b2 += wq * (vals[q] - avg) * (vals[q] - avg);
    }
  }
  return {std::sqrt(e2), std::sqrt(n2), std::sqrt(b2)};
}

std::vector<Vec3> cube_points26(double a) {
  std::vector<Vec3> pts;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k)
        if (i || j || k) pts.emplace_back(a * i, a * j, a * k);
  return pts;
}

double mean_relative_error(const std::vector<double>& exact, const std::vector<double>& approx) {
  if (exact.size() != approx.size() || exact.empty()) throw ConfigError("mean_relative_error: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double d = std::abs(exact[i] - approx[i]);
    s += exact[i] != 0.0 ? d / std::abs(exact[i]) : d;
  }
  return s / double(exact.size());
}

std::vector<double> observed_orders(const std::vector<double>& h, const std::vector<double>& e) {
  std::vector<double> o;
  for (std::size_t i = 0; i + 1 < std::min(h.size(), e.size()); ++i)
    o.push_back(std::log(e[i] / e[i + 1]) / std::log(h[i] / h[i + 1]));
  return o;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) throw ConfigError("loglog_slope: need two points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RunConfig default_config(const std::string& experiment) {
  RunConfig c;
  c.experiment = experiment;
  if (experiment == "exp1") {
    c.geometry = SurfaceKind::cube;
    c.T = 1.0;
    c.levels = {0, 1, 2, 3, 4};
    c.slabs = {1, 2, 4, 8, 16};
  } else if (experiment == "exp2") {
    c.geometry = SurfaceKind::cube;
    c.T = 5.0;
    c.levels = {0};
    c.slabs = {5};
    c.inner.min_depth = 2;
  } else if (experiment == "exp3") {
    c.geometry = SurfaceKind::cube;
    c.T = 4.0;
    c.levels = {0, 1, 2};
    c.slabs = {2, 4, 8};
  } else {
    throw ConfigError("unknown experiment '" + experiment + "'");
  }
  return c;
}

RunConfig parse_run_config(const std::string& text, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  try {
    if (j.contains("experiment")) c = default_config(j["experiment"].get<std::string>());
    for (const auto& [key, v] : j.items()) {
      if (key == "experiment" || key == "field_points") continue;
      else if (key == "geometry") c.geometry = surface_kind_from_string(v.get<std::string>());
      else if (key == "T") c.T = v.get<double>();
      else if (key == "levels") c.levels = v.get<std::vector<int>>();
      else if (key == "slabs") c.slabs = v.get<std::vector<int>>();
      else if (key == "r_max") c.inner.r_max = v.get<int>();
      else if (key == "n_gauss") c.inner.n_gauss = v.get<int>();
      else if (key == "max_slope") c.inner.max_slope = v.get<double>();
      else if (key == "min_depth") c.inner.min_depth = v.get<int>();
      else if (key == "m_Q") c.m_Q = v.get<int>();
      else if (key == "n_min") c.n_min = v.get<int>();
      else if (key == "n_min_list") c.n_min_list = v.get<std::vector<int>>();
      else if (key == "timing_runs") c.timing_runs = v.get<int>();
      else if (key == "distances") c.distances = v.get<std::vector<double>>();
      else if (key == "r_max_list") c.r_max_list = v.get<std::vector<int>>();
      else if (key == "n_gauss_list") c.n_gauss_list = v.get<std::vector<int>>();
      else if (key == "average_r_max_list") c.average_r_max_list = v.get<std::vector<int>>();
      else if (key == "average_slabs") c.average_slabs = v.get<int>();
      else if (key == "corner_solid_angle") c.corner_solid_angle = v.get<double>();
      else if (key == "method") c.method = v.get<std::string>();
      else if (key == "w0_table") c.w0_table = v.get<std::string>();
      else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else throw ConfigError("unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  if (c.levels.size() != c.slabs.size() || c.levels.empty()) throw ConfigError("levels and slabs must match");
  if (!(c.T > 0.0)) throw ConfigError("T must be positive");
  if (c.inner.r_max < 0 || c.inner.n_gauss < 1 || c.inner.min_depth < 0 || c.m_Q < 1 || c.n_min < 1 || c.timing_runs < 1)
    throw ConfigError("quadrature and tree parameters out of range");
  if (c.geometry == SurfaceKind::custom) throw ConfigError("geometry must be cube or sphere");
  if (c.method != "direct" && c.method != "indirect" && c.method != "both")
    throw ConfigError("method must be direct, indirect or both");
  if (!(c.corner_solid_angle >= 0.0 && c.corner_solid_angle <= 1.0))
    throw ConfigError("corner_solid_angle must lie in [0, 1]");
  return c;
}

std::string to_json(const RunConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["geometry"] = to_string(c.geometry);
  j["T"] = c.T;
  j["levels"] = c.levels;
  j["slabs"] = c.slabs;
  j["r_max"] = c.inner.r_max;
  j["n_gauss"] = c.inner.n_gauss;
  j["max_slope"] = c.inner.max_slope;
  j["min_depth"] = c.inner.min_depth;
  j["m_Q"] = c.m_Q;
  j["n_min"] = c.n_min;
  j["n_min_list"] = c.n_min_list;
  j["timing_runs"] = c.timing_runs;
  j["distances"] = c.distances;
  j["r_max_list"] = c.r_max_list;
  j["n_gauss_list"] = c.n_gauss_list;
  j["average_r_max_list"] = c.average_r_max_list;
  j["average_slabs"] = c.average_slabs;
  j["corner_solid_angle"] = c.corner_solid_angle;
  j["method"] = c.method;
  j["w0_table"] = c.w0_table;
  j["out_dir"] = c.out_dir;
  j["field_points"] = "vertices, edge midpoints and face centers of [-0.6, 0.6]^3";
  return j.dump();
}

SpaceTimeMesh level_mesh(const RunConfig& cfg, std::size_t i) {
  if (i >= cfg.levels.size() || cfg.levels.size() != cfg.slabs.size()) throw ConfigError("level_mesh: bad level index");
  if (cfg.levels[i] < 0 || cfg.levels[i] > 6 || cfg.slabs[i] < 1 || cfg.slabs[i] > 4096)
    throw ConfigError("level_mesh: level must lie in [0, 6] and slabs in [1, 4096]");
  return make_mesh(cfg.geometry, cfg.levels[i], cfg.T, cfg.slabs[i]);
}

std::vector<LitRow> run_experiment1(const RunConfig& cfg) {
  const std::vector<std::pair<std::string, Vec3>> points{
      {"A", Vec3::Zero()},
      {"B", Vec3(1, 1, 1) / std::sqrt(3.0)},
      {"C", Vec3(-1.0, -std::sqrt(2.0) / 2.0, -1.0 / std::numbers::pi)}};
  std::vector<LitRow> rows;
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    const SpaceTimeMesh m = level_mesh(cfg, i);
    std::vector<ClusterTree> trees;
    for (int n : cfg.n_min_list) trees.push_back(build_cluster_tree(m, n));
    for (const auto& [name, xs] : points) {
      const SpaceTimePoint x(cfg.T, xs);
      double t_naive = 1e300;
      std::size_t naive_size = 0;
      for (int r = 0; r < cfg.timing_runs; ++r)
        t_naive = std::min(t_naive, seconds_per_call([&] { naive_size = naive_lit_set(m, x).size(); }));
      for (std::size_t k = 0; k < trees.size(); ++k) {
        LitRow row;
        row.geometry = to_string(cfg.geometry);
        row.level = cfg.levels[i];
        row.N = m.size();
        row.point = name;
        row.n_min = cfg.n_min_list[k];
        row.proxy = approximate_lit_leaves(trees[k], x).size();
        row.lit = lit_set(trees[k], m, x).size();
        if (row.lit != naive_size) throw QuadratureError("lit set differs from the naive scan");
        row.t_naive = t_naive;
        row.t_tree = 1e300;
        for (int r = 0; r < cfg.timing_runs; ++r)
          row.t_tree = std::min(row.t_tree, seconds_per_call([&] { (void)lit_set(trees[k], m, x); }));
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::vector<PointwiseRow> pointwise_errors(const RunConfig& cfg, const std::vector<int>& r_max_list,
                                           const std::vector<int>& n_gauss_list, double* corner_jump) {
  const SpaceTimeMesh m = level_mesh(cfg, 0);
  const ClusterTree tree = build_cluster_tree(m, cfg.n_min);
  const SphericalWave wave = bump_wave();
  const CauchyData data = wave.cauchy();
  std::vector<PointwiseRow> rows;
  for (double d : cfg.distances) {
    const SpaceTimePoint x(cfg.T, Vec3(0.5 + d, 0.5, 0.5));
    const auto jump = boundary_jump(m, x.vec(), cfg.corner_solid_angle);
    for (int r : r_max_list)
      for (int n : n_gauss_list) {
        PointwiseRow row;
        row.d = d;
        row.r_max = r;
        row.n_gauss = n;
        row.exact = wave.value(x.vec());
        row.approx = kirchhoff_eval(x, data, Side::exterior, m, tree, with_rule(cfg.inner, r, n), cfg.corner_solid_angle);
        row.error = std::abs(row.exact - row.approx) / std::abs(row.exact);
        row.jump = jump.value_or(0.0);
        rows.push_back(row);
        if (corner_jump && d == 0.0) *corner_jump = (row.exact - (row.approx - row.jump * row.exact)) / row.exact;
      }
  }
  return rows;
}

std::vector<AverageRow> average_errors(const RunConfig& cfg, const std::vector<int>& r_max_list,
                                       const std::vector<int>& n_gauss_list) {
  const SpaceTimeMesh m = make_mesh(cfg.geometry, cfg.levels.front(), cfg.T, cfg.average_slabs);
  const ClusterTree tree = build_cluster_tree(m, cfg.n_min);
  const SphericalWave wave = bump_wave();
  const CauchyData data = wave.cauchy();
  std::vector<AverageRow> rows;
  for (int r : r_max_list)
    for (int n : n_gauss_list) {
      double num = 0.0, den = 0.0;
      for (const Panel& p : m.panels()) {
        const SpaceTimePoint x(p.centroid());
        const double u = wave.value(x.vec());
        num += std::abs(u - kirchhoff_eval(x, data, Side::exterior, m, tree, with_rule(cfg.inner, r, n)));
        den += std::abs(u);
      }
      rows.push_back({r, n, m.size(), num / den});
    }
  return rows;
}

Exp2Result run_experiment2(const RunConfig& cfg) {
  Exp2Result r;
  r.pointwise = pointwise_errors(cfg, cfg.r_max_list, cfg.n_gauss_list, &r.corner_jump_estimate);
  r.average = average_errors(cfg, cfg.average_r_max_list, cfg.n_gauss_list);
  return r;
}

Exp3Result run_experiment3(const RunConfig& cfg) {
  const bool direct = cfg.method != "indirect", indirect = cfg.method != "direct";
  const bool sphere = cfg.geometry == SurfaceKind::sphere;
  if (direct && sphere) throw ConfigError("exp3: the direct study uses the cube geometry");
  std::optional<TimeTable> w0;
  if (sphere && !cfg.w0_table.empty()) w0 = read_time_table(cfg.w0_table);
  const SphericalWave wave = cubic_wave();
  const std::vector<Vec3> pts = cube_points26();
  std::vector<double> exact;
  for (const Vec3& x : pts) exact.push_back(wave.value(Vec4(cfg.T, x[0], x[1], x[2])));

  Exp3Result res;
  const OperatorConfig oc{cfg.inner, cfg.m_Q, true};
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const SpaceTimeMesh m = level_mesh(cfg, i);
    const ClusterTree tree = build_cluster_tree(m, cfg.n_min);
    const GalerkinOperators ops = assemble_operators(m, tree, oc, direct);
    const double t_assembly = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto field = [&](const std::string& method, const std::function<double(const SpaceTimePoint&)>& uh, BemRow& row) {
      std::vector<double> approx;
      for (std::size_t k = 0; k < pts.size(); ++k) {
        approx.push_back(uh(SpaceTimePoint(cfg.T, pts[k])));
        res.field.push_back({method, cfg.levels[i], pts[k], exact[k], approx.back()});
      }
      row.e_field = mean_relative_error(exact, approx);
    };

    if (direct) {
      const auto t1 = std::chrono::steady_clock::now();
      BemRow row = bem_row("direct", cfg.levels[i], m);
      const Density gh = project_Qh1([&](const Vec4& y) { return wave.value(y); }, m);
      SolveReport rep;
      const Density w{FESpace::S0, dense_solve(ops.V, direct_rhs(ops, identity_form(m, cfg.m_Q), gh, Side::exterior), &rep)};
      const L2Errors e = l2_errors(
          [&](const Vec4& y, const Panel& p) { return wave.normal_derivative(y, p.spatial_normal()); }, w, m);
      row.e_abs = e.abs;
      row.e_bem = e.abs / e.norm;
      row.e_opt = e.best / e.norm;
      row.residual = rep.residual;
      row.rcond = rep.rcond;
      field("direct", [&](const SpaceTimePoint& x) { return kirchhoff_eval(x, gh, w, Side::exterior, m, tree, cfg.inner); },
            row);
      row.seconds = t_assembly + std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      res.rows.push_back(row);
    }
    if (indirect) {
      const auto t1 = std::chrono::steady_clock::now();
      BemRow row = bem_row("indirect", cfg.levels[i], m);
      const std::function<double(const Vec4&)> g =
          sphere ? std::function<double(const Vec4&)>(sphere_dirichlet)
                 : std::function<double(const Vec4&)>([&](const Vec4& y) { return wave.value(y); });
      SolveReport rep;
      const Density w{FESpace::S0,
                      dense_solve(ops.V, assemble_bId([&](const SpaceTimePoint& y) { return g(y.vec()); }, m, cfg.m_Q),
                                  &rep)};
      row.residual = rep.residual;
      row.rcond = rep.rcond;
      if (sphere) {
        if (w0) {
          const L2Errors e = l2_errors(
              [&](const Vec4& y, const Panel&) { return (*w0)(y[0]) * real_y10(y.tail<3>()); }, w, m);
          row.e_abs = e.abs;
          row.e_bem = e.abs / e.norm;
          row.e_opt = e.best / e.norm;
        }
      } else {
        field("indirect", [&](const SpaceTimePoint& x) { return single_layer(x, w, m, tree, cfg.inner); }, row);
      }
      row.seconds = t_assembly + std::chrono::duration<double>(std::chrono::steady_clock::now() - t1).count();
      res.rows.push_back(row);
    }
  }
  return res;
}

void write_lit_csv(const std::string& dir, const RunConfig& cfg, const std::vector<LitRow>& rows) {
  auto card = open_csv(dir, "lit_cardinality.csv", cfg);
  card << "geometry,level,N,point,n_min,lit,proxy\n";
  for (const auto& r : rows)
    card << r.geometry << ',' << r.level << ',' << r.N << ',' << r.point << ',' << r.n_min << ',' << r.lit << ','
         << r.proxy << '\n';
  auto tim = open_csv(dir, "lit_timing.csv", cfg);
  tim << "geometry,level,N,point,n_min,t_naive,t_tree\n";
  for (const auto& r : rows)
    tim << r.geometry << ',' << r.level << ',' << r.N << ',' << r.point << ',' << r.n_min << ',' << r.t_naive << ','
        << r.t_tree << '\n';
}

void write_exp2_csv(const std::string& dir, const RunConfig& cfg, const Exp2Result& r) {
  auto pw = open_csv(dir, "quad_pointwise.csv", cfg);
  pw << "# corner jump estimate (u - D g + S w) / u: " << r.corner_jump_estimate << '\n';
  pw << "d,r_max,n_gauss,exact,approx,e_d,jump\n";
  for (const auto& p : r.pointwise)
    pw << p.d << ',' << p.r_max << ',' << p.n_gauss << ',' << p.exact << ',' << p.approx << ',' << p.error << ','
       << p.jump << '\n';
  auto av = open_csv(dir, "quad_avg.csv", cfg);
  av << "r_max,n_gauss,N,e_sigma\n";
  for (const auto& a : r.average) av << a.r_max << ',' << a.n_gauss << ',' << a.N << ',' << a.error << '\n';
}

void write_exp3_csv(const std::string& dir, const RunConfig& cfg, const Exp3Result& r) {
  auto bc = open_csv(dir, "bem_convergence.csv", cfg);
  bc << "method,level,N,h,e_abs,e_bem,e_opt,e_field,order_bem,order_opt,order_field,residual,rcond,seconds\n";
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const BemRow& row = r.rows[i];
    // order against the previous level of the same method
    std::optional<double> ob, oo, of;
    for (std::size_t j = i; j-- > 0;) {
      const BemRow& prev = r.rows[j];
      if (prev.method != row.method) continue;
      const double lh = std::log(prev.h / row.h);
      if (row.e_bem && prev.e_bem) ob = std::log(*prev.e_bem / *row.e_bem) / lh;
      if (row.e_opt && prev.e_opt) oo = std::log(*prev.e_opt / *row.e_opt) / lh;
      if (row.e_field && prev.e_field) of = std::log(*prev.e_field / *row.e_field) / lh;
      break;
    }
    bc << row.method << ',' << row.level << ',' << row.N << ',' << row.h << ',' << opt(row.e_abs) << ','
       << opt(row.e_bem) << ',' << opt(row.e_opt) << ',' << opt(row.e_field) << ',' << opt(ob) << ',' << opt(oo) << ','
       << opt(of) << ',' << row.residual << ',' << row.rcond << ',' << row.seconds << '\n';
  }
  auto fe = open_csv(dir, "field_error.csv", cfg);
  fe << "method,level,x1,x2,x3,exact,approx,rel_error\n";
  for (const auto& f : r.field)
    fe << f.method << ',' << f.level << ',' << f.x[0] << ',' << f.x[1] << ',' << f.x[2] << ',' << f.exact << ','
       << f.approx << ',' << std::abs(f.exact - f.approx) / std::abs(f.exact) << '\n';
}

}  // namespace stbem
