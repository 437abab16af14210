// Command-line driver: meshes, the three experiments and single solves.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "stbem/errors.hpp"
#include "stbem/experiments.hpp"

using namespace stbem;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out = ".";
  bool out_set = false;
  // mesh and single solves
  std::string mesh_file;
  std::string geometry;
  int level = -1;
  double T = -1.0;
  int slabs = -1;
  std::string data;
  std::string density;
  std::string dirichlet;
  std::string points;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RunConfig load_config(const Options& o, const std::string& experiment) {
  RunConfig c = default_config(experiment);
  if (!o.config.empty()) c = parse_run_config(read_file(o.config), c);
  if (o.out_set) c.out_dir = o.out;
  if (!o.geometry.empty()) c = parse_run_config("{\"geometry\": \"" + o.geometry + "\"}", c);
  if (o.T > 0.0) c.T = o.T;
  if (o.level >= 0) c.levels = {o.level};
  if (o.slabs > 0) c.slabs = {o.slabs};
  if (c.levels.size() != c.slabs.size()) c.slabs.resize(c.levels.size(), c.slabs.back());
  fs::create_directories(c.out_dir);
  return c;
}

SpaceTimeMesh load_mesh(const Options& o, const RunConfig& c) {
  if (!o.mesh_file.empty()) return read_mesh_file(o.mesh_file);
  return level_mesh(c, 0);
}

// Dirichlet data of the named problem.
std::function<double(const Vec4&)> dirichlet_data(const std::string& name) {
  if (name == "sphere") return sphere_dirichlet;
  if (name == "bump" || name == "cubic") {
    const SphericalWave w = name == "bump" ? bump_wave() : cubic_wave();
    return [w](const Vec4& y) { return w.value(y); };
  }
  throw ConfigError("unknown data '" + name + "' (sphere, bump or cubic)");
}

std::string default_data(const RunConfig& c) { return c.geometry == SurfaceKind::sphere ? "sphere" : "cubic"; }

std::ofstream open_out(const RunConfig& c, const std::string& name) {
  const fs::path p = fs::path(c.out_dir) / name;
  std::ofstream out(p);
  if (!out) throw ConfigError("cannot write " + p.string());
  out.precision(17);
  return out;
}

void report(const std::string& what, const SolveReport& r, std::size_t n) {
  std::cout << what << ": N=" << n << " residual=" << r.residual << " rcond=" << r.rcond << '\n';
}

std::vector<SpaceTimePoint> field_points(const Options& o, const RunConfig& c) {
  std::vector<SpaceTimePoint> pts;
  if (o.points.empty()) {
    for (const Vec3& x : cube_points26()) pts.emplace_back(c.T, x);
    return pts;
  }
  std::ifstream in(o.points);
  if (!in) throw ConfigError("cannot open " + o.points);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream s(line);
    double t, x, y, z;
    if (!(s >> t >> x >> y >> z)) throw ConfigError("bad point row: " + line);
    pts.emplace_back(t, Vec3(x, y, z));
  }
  if (pts.empty()) throw ConfigError("no points in " + o.points);
  return pts;
}

Density read_density(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_density_csv(in);
}

int cmd_mesh(const Options& o) {
  const RunConfig c = load_config(o, "exp3");
  const SpaceTimeMesh m = level_mesh(c, 0);
  const fs::path p = fs::path(c.out_dir) / "mesh.txt";
  write_mesh_file(p.string(), m);
  std::cout << "mesh: " << to_string(c.geometry) << " N=" << m.size() << " -> " << p.string()
            << '\n';
  return 0;
}

int cmd_exp1(const Options& o) {
  const RunConfig c = load_config(o, "exp1");
  const auto rows = run_experiment1(c);
  write_lit_csv(c.out_dir, c, rows);
  std::cout << "exp1: " << rows.size() << " rows -> " << c.out_dir << '\n';
  return 0;
}

int cmd_exp2(const Options& o) {
  const RunConfig c = load_config(o, "exp2");
  const Exp2Result r = run_experiment2(c);
  write_exp2_csv(c.out_dir, c, r);
  std::cout << "exp2: corner jump estimate " << r.corner_jump_estimate << " -> " << c.out_dir << '\n';
  return 0;
}

int cmd_exp3(const Options& o) {
  const RunConfig c = load_config(o, "exp3");
  const Exp3Result r = run_experiment3(c);
  write_exp3_csv(c.out_dir, c, r);
  for (const BemRow& row : r.rows) {
    std::cout << row.method << " level " << row.level << " N=" << row.N;
    if (row.e_bem) std::cout << " e_bem=" << *row.e_bem;
    if (row.e_opt) std::cout << " e_opt=" << *row.e_opt;
    if (row.e_field) std::cout << " e_field=" << *row.e_field;
    std::cout << " (" << row.seconds << " s)\n";
  }
  return 0;
}

int cmd_solve_indirect(const Options& o) {
  const RunConfig c = load_config(o, "exp3");
  const SpaceTimeMesh m = load_mesh(o, c);
  const ClusterTree tree = build_cluster_tree(m, c.n_min);
  SolveReport rep;
  const Density w = solve_indirect(dirichlet_data(o.data.empty() ? default_data(c) : o.data), m, tree,
                                   OperatorConfig{c.inner, c.m_Q, true}, &rep);
  std::ofstream out = open_out(c, "density.csv");
  write_density_csv(out, w);
  report("solve-indirect", rep, m.size());
  return 0;
}

int cmd_solve_direct(const Options& o) {
  const RunConfig c = load_config(o, "exp3");
  const SpaceTimeMesh m = load_mesh(o, c);
  const ClusterTree tree = build_cluster_tree(m, c.n_min);
  const auto g = dirichlet_data(o.data.empty() ? default_data(c) : o.data);
  SolveReport rep;
  const Density w = solve_direct(g, m, tree, OperatorConfig{c.inner, c.m_Q, true}, Side::exterior, &rep);
  std::ofstream out = open_out(c, "density.csv");
  write_density_csv(out, w);
  std::ofstream gout = open_out(c, "dirichlet.csv");
  write_density_csv(gout, project_Qh1(g, m));
  report("solve-direct", rep, m.size());
  return 0;
}

int cmd_eval_field(const Options& o) {
  const RunConfig c = load_config(o, "exp3");
  if (o.density.empty()) throw ConfigError("eval-field needs --density");
  const SpaceTimeMesh m = load_mesh(o, c);
  const ClusterTree tree = build_cluster_tree(m, c.n_min);
  const Density w = read_density(o.density);
  w.check(m);
  std::optional<Density> g;
  if (!o.dirichlet.empty()) {
    g = read_density(o.dirichlet);
    g->check(m);
  }
  std::optional<SphericalWave> exact;
  if (o.data == "bump") exact = bump_wave();
  if (o.data == "cubic") exact = cubic_wave();

  std::ofstream out = open_out(c, "field.csv");
  out << "# config: " << to_json(c) << '\n';
  out << "t,x1,x2,x3,approx" << (exact ? ",exact" : "") << '\n';
  for (const SpaceTimePoint& x : field_points(o, c)) {
    const double u = g ? kirchhoff_eval(x, *g, w, Side::exterior, m, tree, c.inner, c.corner_solid_angle)
                       : single_layer(x, w, m, tree, c.inner);
    out << x.t << ',' << x.x[0] << ',' << x.x[1] << ',' << x.x[2] << ',' << u;
    if (exact) out << ',' << exact->value(x.vec());
    out << '\n';
  }
  std::cout << "eval-field -> " << (fs::path(c.out_dir) / "field.csv").string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time retarded potential BEM on cube and sphere surfaces"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option_function<std::string>(
        "--out", [&](const std::string& s) { o.out = s, o.out_set = true; }, "output directory");
    sub->add_option("--geometry", o.geometry, "cube or sphere");
    sub->add_option("--T", o.T, "final time");
    sub->add_option("--level", o.level, "surface refinement level (single mesh)");
    sub->add_option("--slabs", o.slabs, "time slabs (single mesh)");
  };
  auto single = [&](CLI::App* sub) {
    sub->add_option("--mesh", o.mesh_file, "mesh file written by 'mesh'")->check(CLI::ExistingFile);
    sub->add_option("--data", o.data, "sphere, bump or cubic");
  };

  std::vector<std::pair<CLI::App*, int (*)(const Options&)>> cmds;
  CLI::App* mesh = app.add_subcommand("mesh", "write a space-time mesh");
  common(mesh);
  cmds.emplace_back(mesh, cmd_mesh);
  for (auto [name, help, fn] : {std::tuple{"exp1", "lit-panel counts and timings", cmd_exp1},
                                std::tuple{"exp2", "Kirchhoff formula with exact Cauchy data", cmd_exp2},
                                std::tuple{"exp3", "BEM convergence study", cmd_exp3}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    common(sub);
    cmds.emplace_back(sub, fn);
  }
  CLI::App* si = app.add_subcommand("solve-indirect", "solve the single layer equation");
  common(si);
  single(si);
  cmds.emplace_back(si, cmd_solve_indirect);
  CLI::App* sd = app.add_subcommand("solve-direct", "solve for the Neumann trace");
  common(sd);
  single(sd);
  cmds.emplace_back(sd, cmd_solve_direct);
  CLI::App* ef = app.add_subcommand("eval-field", "evaluate the wave field off the boundary");
  common(ef);
  single(ef);
  ef->add_option("--density", o.density, "S0 density CSV");
  ef->add_option("--dirichlet", o.dirichlet, "V1 Dirichlet CSV; enables the Kirchhoff formula");
  ef->add_option("--points", o.points, "rows t,x1,x2,x3 (default: the 26 cube points at T)");
  cmds.emplace_back(ef, cmd_eval_field);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  try {
    for (auto [sub, fn] : cmds)
      if (sub->parsed()) return fn(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
