#include "masolve/cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "masolve/errors.hpp"

namespace masolve::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------------------
// Field access with path-qualified diagnostics and unknown-field rejection.

class Obj {
 public:
  Obj(const json& j, std::string path, std::initializer_list<const char*> allowed) : j_(j), path_(std::move(path)) {
    if (!j.is_object()) fail("", "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
      if (!ok.count(key)) fail(key, "unknown field");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& at(const std::string& key) const {
    if (!has(key)) fail(key, "missing required field");
    return j_.at(key);
  }
  std::string where(const std::string& key) const { return key.empty() ? path_ : path_ + "." + key; }

  double num(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "expected a finite number");
    return d;
  }
  double num(const std::string& key, double fallback) const { return has(key) ? num(key) : fallback; }
  double positive(const std::string& key, double fallback) const {
    const double d = num(key, fallback);
    if (!(d > 0.0)) fail(key, "must be positive");
    return d;
  }
  long integer(const std::string& key, long fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<long>();
  }
  std::string str(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& key, const std::string& fallback) const { return has(key) ? str(key) : fallback; }
  bool boolean(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
  }
  Point2 point(const std::string& key, Point2 fallback) const {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) fail(key, "expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
  }
  std::vector<double> numbers(const std::string& key) const {
    const json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) fail(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError(where(key) + ": " + what);
  }

 private:
  const json& j_;
  std::string path_;
};

BoundaryData parse_boundary(const json& j, const std::string& path) {
  const std::string kind = j.is_object() && j.contains("kind") && j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "constant") {
    Obj o(j, path, {"kind", "value"});
    return BoundaryData::constant(o.num("value"));
  }
  if (kind == "cosine") {
    Obj o(j, path, {"kind", "offset", "amplitude", "mode"});
    return BoundaryData::cosine(o.num("offset", 0.0), o.num("amplitude"), static_cast<int>(o.integer("mode", 1)));
  }
  if (kind == "radial_quadratic") {
    Obj o(j, path, {"kind", "scale", "offset"});
    return BoundaryData::radial_quadratic(o.num("scale", 1.0), o.num("offset", 0.0));
  }
  throw ConfigError(path + ".kind: expected one of constant, cosine, radial_quadratic");
}

ConvexDomain parse_domain(const json& j, const std::string& path, BoundaryData g) {
  const std::string kind = j.is_object() && j.contains("kind") && j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  if (kind == "disk") {
    Obj o(j, path, {"kind", "center", "radius"});
    return ConvexDomain::disk(o.point("center", {}), o.positive("radius", 1.0), g);
  }
  if (kind == "ellipse") {
    Obj o(j, path, {"kind", "center", "a", "b"});
    return ConvexDomain::ellipse(o.point("center", {}), o.positive("a", 1.0), o.positive("b", 1.0), g);
  }
  if (kind == "superellipse") {
    Obj o(j, path, {"kind", "center", "a", "b", "exponent"});
    const double p = o.num("exponent");
    if (!(p >= 2.0)) o.fail("exponent", "must be at least 2");
    return ConvexDomain::superellipse(o.point("center", {}), o.positive("a", 1.0), o.positive("b", 1.0), p, g);
  }
  if (kind == "polygon") {
    Obj o(j, path, {"kind", "vertices"});
    const json& v = o.at("vertices");
    std::vector<Point2> pts;
    if (!v.is_array()) o.fail("vertices", "expected an array of [x, y]");
    for (const auto& e : v) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
        o.fail("vertices", "expected an array of [x, y]");
      }
      pts.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    ConvexDomain::polygon(pts);  // always throws DegenerateDomain
  }
  throw ConfigError(path + ".kind: expected one of disk, ellipse, superellipse, polygon");
}

SlopeDensity parse_R(const json& j, const std::string& path, const std::string& base_dir) {
  const std::string kind = j.is_object() && j.contains("kind") && j["kind"].is_string() ? j["kind"].get<std::string>() : "";
  try {
    if (kind == "constant") {
      Obj o(j, path, {"kind", "value"});
      return SlopeDensity::constant(o.positive("value", 1.0));
    }
    if (kind == "gauss_curvature") {
      Obj o(j, path, {"kind", "q"});
      return SlopeDensity::gauss_curvature(o.num("q"));
    }
    if (kind == "power_tail") {
      Obj o(j, path, {"kind", "C0", "k", "r0"});
      return SlopeDensity::power_tail(o.num("C0"), o.num("k"), o.num("r0"));
    }
    if (kind == "tabulated") {
      Obj o(j, path, {"kind", "file"});
      fs::path file = o.str("file");
      if (file.is_relative()) file = fs::path(base_dir) / file;
      return SlopeDensity::load_tabulated(file.string());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ".kind: expected one of constant, gauss_curvature, power_tail, tabulated");
}

SourceMeasure parse_source(const json& j, const std::string& path, Point2 centre) {
  Obj o(j, path, {"density", "atoms"});
  SourceDensity density;
  if (o.has("density")) {
    const json& d = o.at("density");
    const std::string dpath = path + ".density";
    const std::string kind = d.is_object() && d.contains("kind") && d["kind"].is_string() ? d["kind"].get<std::string>() : "";
    if (kind == "zero") {
      Obj od(d, dpath, {"kind"});
      density = SourceDensity::zero();
    } else if (kind == "constant") {
      Obj od(d, dpath, {"kind", "value"});
      const double v = od.num("value");
      if (v < 0.0) od.fail("value", "must be non-negative");
      density = SourceDensity::constant(v);
    } else if (kind == "radial_polynomial") {
      Obj od(d, dpath, {"kind", "coefficients"});
      density = SourceDensity::radial_polynomial(od.numbers("coefficients"), centre);
    } else {
      throw ConfigError(dpath + ".kind: expected one of zero, constant, radial_polynomial");
    }
  }
  std::vector<Atom> atoms;
  if (o.has("atoms")) {
    const json& a = o.at("atoms");
    if (!a.is_array()) o.fail("atoms", "expected an array");
    for (std::size_t n = 0; n < a.size(); ++n) {
      Obj oa(a[n], path + ".atoms[" + std::to_string(n) + "]", {"x", "mass"});
      if (!oa.has("x")) oa.fail("x", "missing required field");
      atoms.push_back({oa.point("x", {}), oa.positive("mass", 1.0)});
    }
  }
  return SourceMeasure(std::move(density), std::move(atoms));
}

SweepOrder parse_order(const std::string& s, const Obj& o) {
  if (s == "index") return SweepOrder::Index;
  if (s == "largest_residual") return SweepOrder::LargestResidual;
  o.fail("sweep_order", "expected index or largest_residual");
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  Obj top(root, "config",
          {"domain", "boundary_data", "slope_density", "source", "mesh", "solve", "quadrature", "assumptions",
           "delta_schedule", "study", "verify", "seed"});
  ProblemConfig cfg;

  const BoundaryData g = top.has("boundary_data") ? parse_boundary(top.at("boundary_data"), "config.boundary_data")
                                                  : BoundaryData::constant(0.0);
  cfg.domain = parse_domain(top.at("domain"), "config.domain", g);
  cfg.R = top.has("slope_density") ? parse_R(top.at("slope_density"), "config.slope_density", base_dir)
                                   : SlopeDensity::constant(1.0);
  if (top.has("source")) cfg.mu = parse_source(top.at("source"), "config.source", cfg.domain.center());

  if (top.has("mesh")) {
    Obj o(top.at("mesh"), "config.mesh", {"n_boundary", "spacing"});
    cfg.n_boundary = static_cast<int>(o.integer("n_boundary", cfg.n_boundary));
    if (cfg.n_boundary < 4) o.fail("n_boundary", "must be at least 4");
    cfg.spacing = o.positive("spacing", cfg.spacing);
  }
  if (top.has("solve")) {
    Obj o(top.at("solve"), "config.solve", {"mass_tol", "bisection_tol", "max_sweeps", "sweep_order", "log"});
    cfg.solve.mass_tol = o.num("mass_tol", 0.0);
    if (cfg.solve.mass_tol < 0.0) o.fail("mass_tol", "must be positive (or 0 for automatic)");
    cfg.solve.bisection_tol = o.positive("bisection_tol", cfg.solve.bisection_tol);
    cfg.solve.max_sweeps = static_cast<int>(o.integer("max_sweeps", cfg.solve.max_sweeps));
    if (cfg.solve.max_sweeps < 1) o.fail("max_sweeps", "must be at least 1");
    if (o.has("sweep_order")) cfg.solve.order = parse_order(o.str("sweep_order"), o);
    cfg.solve.log = o.boolean("log", false);
  }
  if (top.has("quadrature")) {
    Obj o(top.at("quadrature"), "config.quadrature", {"rel_tol", "abs_tol", "max_subdivisions", "triangle_rule_order"});
    auto& q = cfg.solve.quad;
    q.rel_tol = o.positive("rel_tol", q.rel_tol);
    q.abs_tol = o.positive("abs_tol", q.abs_tol);
    q.max_subdivisions = static_cast<int>(o.integer("max_subdivisions", q.max_subdivisions));
    if (q.max_subdivisions < 0) o.fail("max_subdivisions", "must be non-negative");
    q.triangle_rule_order = static_cast<int>(o.integer("triangle_rule_order", q.triangle_rule_order));
    if (q.triangle_rule_order != 1 && q.triangle_rule_order != 2 && q.triangle_rule_order != 5) {
      o.fail("triangle_rule_order", "must be 1, 2 or 5");
    }
  }

  cfg.profile = derive_profile(cfg.domain, cfg.R, cfg.mu);
  if (top.has("assumptions")) {
    Obj o(top.at("assumptions"), "config.assumptions", {"tau", "eta", "k", "C0", "r0", "lambda", "C1p"});
    auto& p = cfg.profile;
    p.tau = o.num("tau", p.tau);
    p.eta = o.positive("eta", p.eta);
    p.k = o.num("k", p.k);
    p.C0 = o.positive("C0", p.C0);
    p.r0 = o.positive("r0", p.r0);
    p.lambda = o.num("lambda", p.lambda);
    p.C1p = o.positive("C1p", p.C1p);
    if (p.tau < 0.0) o.fail("tau", "must be non-negative");
    if (p.k < 0.0) o.fail("k", "must be non-negative");
    if (p.lambda < 0.0) o.fail("lambda", "must be non-negative");
  }

  if (top.has("delta_schedule")) {
    const json& d = top.at("delta_schedule");
    if (d.is_array()) {
      cfg.delta_schedule = top.numbers("delta_schedule");
    } else {
      Obj o(d, "config.delta_schedule", {"start", "levels"});
      cfg.delta_schedule = halving_schedule(o.positive("start", 0.4), static_cast<int>(o.integer("levels", 4)));
    }
    for (std::size_t l = 0; l < cfg.delta_schedule.size(); ++l) {
      if (!(cfg.delta_schedule[l] > 0.0) || (l > 0 && !(cfg.delta_schedule[l] < cfg.delta_schedule[l - 1]))) {
        throw ConfigError("config.delta_schedule: must be positive and strictly decreasing");
      }
    }
  }
  if (top.has("study")) {
    Obj o(top.at("study"), "config.study", {"n_boundary", "spacing", "delta", "exact", "grid"});
    if (o.has("n_boundary")) {
      cfg.study.n_boundary.clear();
      for (double v : o.numbers("n_boundary")) {
        if (v < 4 || v != std::floor(v)) o.fail("n_boundary", "entries must be integers >= 4");
        cfg.study.n_boundary.push_back(static_cast<int>(v));
      }
    }
    if (o.has("spacing")) {
      cfg.study.spacing = o.numbers("spacing");
      if (cfg.study.spacing.size() != cfg.study.n_boundary.size()) o.fail("spacing", "must match n_boundary in length");
      for (double s : cfg.study.spacing) {
        if (!(s > 0.0)) o.fail("spacing", "entries must be positive");
      }
    }
    cfg.study.delta = o.positive("delta", cfg.study.delta);
    cfg.study.exact = o.boolean("exact", cfg.study.exact);
    cfg.study.grid = static_cast<int>(o.integer("grid", cfg.study.grid));
    if (cfg.study.grid < 2) o.fail("grid", "must be at least 2");
  }
  if (top.has("verify")) {
    Obj o(top.at("verify"), "config.verify", {"monte_carlo_samples", "comparison_scale"});
    cfg.verify.monte_carlo_samples = o.integer("monte_carlo_samples", cfg.verify.monte_carlo_samples);
    if (cfg.verify.monte_carlo_samples < 1) o.fail("monte_carlo_samples", "must be positive");
    cfg.verify.comparison_scale = o.num("comparison_scale", cfg.verify.comparison_scale);
    if (!(cfg.verify.comparison_scale >= 1.0)) o.fail("comparison_scale", "must be at least 1");
  }
  if (top.has("seed")) {
    const json& s = top.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      top.fail("seed", "expected a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  const fs::path base = fs::path(path).parent_path();
  return parse_config(ss.str(), base.empty() ? "." : base.string());
}

// ---------------------------------------------------------------------------
// Output

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

void write_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp);
  }
  fs::rename(tmp, path);
}

std::string mesh_vertices_csv(const Mesh& mesh) {
  std::string s = "vertex_id,kind,x,y\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point2 p = mesh.vertex(v);
    s += std::to_string(v) + (mesh.is_boundary(v) ? ",boundary," : ",interior,") + fmt(p.x) + "," + fmt(p.y) + "\n";
  }
  return s;
}

std::string mesh_triangles_csv(const Mesh& mesh) {
  std::string s = "triangle_id,v0,v1,v2\n";
  for (std::size_t t = 0; t < mesh.triangles().size(); ++t) {
    const auto& tri = mesh.triangles()[t];
    s += std::to_string(t) + "," + std::to_string(tri[0]) + "," + std::to_string(tri[1]) + "," +
         std::to_string(tri[2]) + "\n";
  }
  return s;
}

std::string envelope_vertices_csv(const ConvexEnvelope& env) {
  const Mesh& mesh = env.source_mesh();
  std::string s = "vertex_id,x,y,height,active,cell_area\n";
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    const Point2 p = mesh.vertex(v);
    const double area = mesh.is_boundary(v) ? std::numeric_limits<double>::infinity()
                                            : polygon_area(subdifferential_cell(env, v));
    s += std::to_string(v) + "," + fmt(p.x) + "," + fmt(p.y) + "," + fmt(env.heights().at(v)) + "," +
         (env.active(v) ? "1" : "0") + "," + fmt(area) + "\n";
  }
  return s;
}

std::string envelope_facets_csv(const ConvexEnvelope& env) {
  std::string s = "facet_id,v0,v1,v2,px,py\n";
  for (std::size_t f = 0; f < env.facets().size(); ++f) {
    const Facet& fc = env.facets()[f];
    s += std::to_string(f) + "," + std::to_string(fc.vertex_ids[0]) + "," + std::to_string(fc.vertex_ids[1]) + "," +
         std::to_string(fc.vertex_ids[2]) + "," + fmt(fc.gradient.x) + "," + fmt(fc.gradient.y) + "\n";
  }
  return s;
}

std::string convergence_csv(const ConvergenceTable& table) {
  std::string s = "h,n_boundary,spacing,linf_error,border_gap,runtime_ms\n";
  for (const auto& r : table.rows) {
    s += fmt(r.h) + "," + std::to_string(r.n_boundary) + "," + fmt(r.spacing) + "," + fmt(r.linf_error) + "," +
         fmt(r.border_gap) + "," + fmt(r.runtime_ms) + "\n";
  }
  return s;
}

HeightField read_vertex_heights(const std::string& csv_text, const Mesh& mesh) {
  HeightField hf;
  hf.interior.assign(mesh.num_interior(), 0.0);
  hf.boundary.assign(mesh.num_boundary(), 0.0);
  std::vector<char> seen(mesh.num_vertices(), 0);
  std::istringstream in(csv_text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw std::runtime_error("vertex csv: expected 6 columns");
    const int v = std::stoi(cells[0]);
    if (v < 0 || v >= mesh.num_vertices()) throw std::runtime_error("vertex csv: vertex id out of range");
    const double z = std::stod(cells[3]);
    if (mesh.is_boundary(v)) {
      hf.boundary[v - mesh.num_interior()] = z;
    } else {
      hf.interior[v] = z;
    }
    seen[v] = 1;
  }
  for (char c : seen) {
    if (!c) throw std::runtime_error("vertex csv: missing vertices");
  }
  return hf;
}

// ---------------------------------------------------------------------------
// Commands

namespace {

json report_json(const SolveReport& rep) {
  json j;
  j["converged"] = rep.converged;
  j["sweeps"] = rep.sweeps;
  j["relaxations"] = rep.relaxations;
  j["mass_tol"] = rep.mass_tol;
  j["bisection_tol"] = rep.bisection_tol;
  j["max_residual"] = rep.max_residual();
  j["residual_history"] = rep.residual_history;
  j["a_priori_bounds"] = {rep.lower_bound, rep.upper_bound};
  j["within_bounds"] = rep.within_bounds;
  j["quadrature_ok"] = rep.quadrature_ok;
  j["flags"] = rep.flags;
  double st = 0.0, sm = 0.0;
  for (double t : rep.targets) st += t;
  for (double m : rep.masses) sm += m;
  j["sum_targets"] = st;
  j["sum_masses"] = sm;
  j["targets"] = rep.targets;
  j["masses"] = rep.masses;
  j["heights"] = rep.heights.interior;
  return j;
}

json assumptions_json(const AssumptionReport& a, const AssumptionProfile& p) {
  json j;
  j["source_mass"] = a.source_mass;
  j["slope_mass"] = std::isinf(a.slope_mass) ? json("inf") : json(a.slope_mass);
  j["mass_gap_ok"] = a.mass_gap_ok;
  j["K"] = a.K;
  j["k"] = a.k;
  j["exponent_ok"] = a.exponent_ok;
  j["decay_ok"] = a.decay_ok;
  j["source_decay_ratio"] = a.source_decay_ratio;
  j["source_decay_ok"] = a.source_decay_ok;
  j["parabolic_ratio"] = a.parabolic_ratio;
  j["parabolic_ok"] = a.parabolic_ok;
  j["messages"] = a.messages;
  j["profile"] = {{"tau", p.tau}, {"eta", p.eta}, {"k", p.k}, {"C0", p.C0}, {"r0", p.r0},
                  {"lambda", p.lambda}, {"C1p", p.C1p}, {"d", p.d}};
  return j;
}

void write_solution(const fs::path& out, const std::string& prefix, const Mesh& mesh, const SolveReport& rep) {
  const ConvexEnvelope env(mesh, rep.heights);
  write_atomic((out / (prefix + "envelope_vertices.csv")).string(), envelope_vertices_csv(env));
  write_atomic((out / (prefix + "envelope_facets.csv")).string(), envelope_facets_csv(env));
}

int solve_status(const SolveReport& rep) { return rep.converged && rep.quadrature_ok ? kOk : kToleranceFailure; }

int cmd_solve(const ProblemConfig& cfg, const fs::path& out, std::ostream& log) {
  const Mesh mesh = build_mesh(cfg.domain, cfg.n_boundary, cfg.spacing);
  write_atomic((out / "mesh_vertices.csv").string(), mesh_vertices_csv(mesh));
  write_atomic((out / "mesh_triangles.csv").string(), mesh_triangles_csv(mesh));
  const SolveReport rep = solve_classical(mesh, cfg.domain, cfg.R, cfg.mu, cfg.solve);
  write_solution(out, "", mesh, rep);
  json j = report_json(rep);
  j["command"] = "solve";
  j["mesh"] = {{"n_interior", mesh.num_interior()}, {"n_boundary", mesh.num_boundary()}, {"h", mesh.h()}};
  write_atomic((out / "report.json").string(), j.dump(2) + "\n");
  log << "solve: " << (rep.converged ? "converged" : "not converged") << " after " << rep.sweeps
      << " sweeps, max residual " << fmt(rep.max_residual()) << " (tol " << fmt(rep.mass_tol) << ")\n";
  return solve_status(rep);
}

int cmd_solve_weak(const ProblemConfig& cfg, const fs::path& out, std::ostream& log) {
  const Mesh mesh = build_mesh(cfg.domain, cfg.n_boundary, cfg.spacing);
  write_atomic((out / "mesh_vertices.csv").string(), mesh_vertices_csv(mesh));
  write_atomic((out / "mesh_triangles.csv").string(), mesh_triangles_csv(mesh));
  const auto schedule = cfg.delta_schedule.empty() ? halving_schedule(0.4, 4) : cfg.delta_schedule;
  const WeakReport wr = solve_weak(mesh, cfg.domain, cfg.R, cfg.mu, schedule, cfg.solve);
  json j;
  j["command"] = "solve-weak";
  j["deltas"] = wr.deltas;
  j["gaps"] = wr.gaps;
  j["gaps_decreasing"] = wr.gaps_decreasing;
  j["monotonicity_violations"] = wr.monotonicity_violations;
  j["max_increase"] = wr.max_increase;
  j["cauchy_estimate"] = wr.cauchy_estimate;
  j["levels"] = json::array();
  int status = kOk;
  for (std::size_t l = 0; l < wr.levels.size(); ++l) {
    json lj = report_json(wr.levels[l]);
    lj["delta"] = wr.deltas[l];
    j["levels"].push_back(lj);
    write_solution(out, "level" + std::to_string(l) + "_", mesh, wr.levels[l]);
    if (solve_status(wr.levels[l]) != kOk) status = kToleranceFailure;
  }
  if (wr.monotonicity_violations > 0) status = kToleranceFailure;
  write_atomic((out / "weak_report.json").string(), j.dump(2) + "\n");
  log << "solve-weak: " << wr.levels.size() << " levels, " << wr.monotonicity_violations
      << " monotonicity violations, final gap " << fmt(wr.cauchy_estimate) << "\n";
  return status;
}

int cmd_study(const ProblemConfig& cfg, const fs::path& out, std::ostream& log) {
  std::vector<MeshSpec> meshes;
  const double scale = 0.5 * (cfg.domain.semi_axis_x() + cfg.domain.semi_axis_y());
  for (std::size_t r = 0; r < cfg.study.n_boundary.size(); ++r) {
    const int n = cfg.study.n_boundary[r];
    const double s = cfg.study.spacing.empty() ? 2.0 * std::numbers::pi * scale / n : cfg.study.spacing[r];
    meshes.push_back({n, s});
  }
  std::optional<RadialExactSolution> exact;
  if (cfg.study.exact) {
    const auto& dom = cfg.domain;
    const auto& dens = cfg.mu.density();
    const auto& g = dom.boundary_data();
    if (dom.shape() != ConvexDomain::Shape::Disk || dom.semi_axis_x() != dom.semi_axis_y()) {
      throw ConfigError("config.study.exact: the radial exact solution needs a disk domain");
    }
    if (!cfg.R.radial()) throw ConfigError("config.study.exact: the radial exact solution needs a radial slope density");
    if (!cfg.mu.atoms().empty() ||
        (dens.kind != SourceDensity::Kind::Constant && dens.kind != SourceDensity::Kind::Zero)) {
      throw ConfigError("config.study.exact: the radial exact solution needs a constant source density");
    }
    if (g.kind != BoundaryData::Kind::Constant) {
      throw ConfigError("config.study.exact: the radial exact solution needs constant boundary data");
    }
    exact = radial_exact_solution(cfg.R, dens.is_zero() ? 0.0 : dens.value, 4001, g.offset, dom.semi_axis_x(),
                                  dom.center());
  }
  const ConvergenceTable table = convergence_study(cfg.domain, cfg.R, cfg.mu, exact ? &*exact : nullptr, meshes,
                                                   cfg.study.delta, cfg.solve, cfg.study.grid);
  write_atomic((out / "convergence.csv").string(), convergence_csv(table));
  json j;
  j["command"] = "study";
  j["delta"] = table.delta;
  j["grid"] = table.grid;
  j["exact"] = cfg.study.exact;
  j["rows"] = json::array();
  bool all_converged = true;
  for (const auto& r : table.rows) {
    j["rows"].push_back({{"h", r.h}, {"n_boundary", r.n_boundary}, {"spacing", r.spacing},
                         {"linf_error", r.linf_error}, {"border_gap", r.border_gap},
                         {"max_boundary_facet", r.max_boundary_facet}, {"eval_points", r.eval_points},
                         {"skipped_points", r.skipped_points}, {"converged", r.converged},
                         {"runtime_ms", r.runtime_ms}});
    all_converged = all_converged && r.converged;
  }
  j["h_decreasing"] = table.h_decreasing();
  j["errors_decreasing"] = table.errors_decreasing();
  j["gaps_decreasing"] = table.gaps_decreasing();
  write_atomic((out / "study.json").string(), j.dump(2) + "\n");
  log << "study: " << table.rows.size() << " rows, errors "
      << (table.errors_decreasing() ? "decreasing" : "not decreasing") << "\n";
  return all_converged ? kOk : kToleranceFailure;
}

int cmd_verify(const ProblemConfig& cfg, const AssumptionReport& assumptions, const fs::path& out,
               std::ostream& log) {
  const Mesh mesh = build_mesh(cfg.domain, cfg.n_boundary, cfg.spacing);
  json j;
  j["command"] = "verify";
  j["assumptions"] = assumptions_json(assumptions, cfg.profile);

  const MeshReport mr = check_mesh(mesh, cfg.domain, cfg.study.delta);
  j["mesh"] = {{"conforming", mr.conforming}, {"convex_outline", mr.convex_outline},
               {"boundary_on_curve", mr.boundary_on_curve}, {"interior_strictly_inside", mr.interior_strictly_inside},
               {"inner_region_contained", mr.inner_region_contained}, {"delta", cfg.study.delta},
               {"max_boundary_facet_diameter", mr.max_boundary_facet_diameter}, {"h", mr.h}};

  const auto targets = target_masses(mesh, cfg.mu, cfg.solve.quad);
  std::vector<double> high = targets;
  for (double& m : high) m *= cfg.verify.comparison_scale;
  int status = kOk;
  bool can_scale = true;
  double sum_high = 0.0;
  for (double m : high) sum_high += m;
  if (!(std::isinf(cfg.R.total_mass()) || sum_high < cfg.R.total_mass() * (1.0 - 1e-9))) can_scale = false;
  if (can_scale) {
    const ComparisonReport cr = comparison_check(mesh, cfg.domain, cfg.R, targets, high, cfg.solve);
    j["comparison"] = {{"scale", cfg.verify.comparison_scale}, {"max_violation", cr.max_violation},
                       {"violations", cr.violations}, {"strictly_ordered", cr.strictly_ordered},
                       {"both_converged", cr.both_converged}, {"passed", cr.passed()}};
    if (!cr.passed()) status = kToleranceFailure;
  } else {
    j["comparison"] = {{"skipped", "scaled targets exceed the total slope-density mass"}};
  }

  const SolveReport rep = solve_classical(mesh, cfg.domain, cfg.R, cfg.mu, cfg.solve);
  if (solve_status(rep) != kOk) status = kToleranceFailure;
  const ConvexEnvelope env(mesh, rep.heights);
  const MonteCarloCell mc = monte_carlo_largest_cell(env, cfg.verify.monte_carlo_samples, cfg.seed);
  j["monte_carlo"] = {{"vertex", mc.vertex}, {"polygon_area", mc.polygon_area}, {"estimate", mc.estimate},
                      {"relative_error", mc.relative_error()}, {"samples", mc.samples}, {"seed", cfg.seed},
                      {"ring_clear", mc.ring_clear}, {"passed", mc.ring_clear && mc.relative_error() <= 0.01}};
  if (!(mc.ring_clear && mc.relative_error() <= 0.01)) status = kToleranceFailure;
  j["solve"] = {{"converged", rep.converged}, {"max_residual", rep.max_residual()}, {"mass_tol", rep.mass_tol},
                {"within_bounds", rep.within_bounds}};
  write_atomic((out / "verify.json").string(), j.dump(2) + "\n");
  log << "verify: " << (status == kOk ? "all checks passed" : "some checks failed") << "\n";
  return status;
}

}  // namespace

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed, std::ostream& log) {
  static const std::set<std::string> commands{"solve", "solve-weak", "study", "verify"};
  if (!commands.count(command)) {
    log << "error: unknown command '" << command << "' (expected solve, solve-weak, study or verify)\n";
    return kBadConfig;
  }
  ProblemConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const DegenerateDomain& e) {
    log << "assumption violation: domain is not strictly convex: " << e.what() << "\n";
    return kAssumptionViolation;
  }
  if (seed) cfg.seed = *seed;

  try {
    fs::create_directories(out_dir);
    const AssumptionReport assumptions = validate_assumptions(cfg.profile, cfg.R, cfg.mu, cfg.domain);
    for (const auto& m : assumptions.messages) log << "assumptions: " << m << "\n";
    if (!assumptions.solvable()) {
      json j;
      j["command"] = command;
      j["assumptions"] = assumptions_json(assumptions, cfg.profile);
      j["error"] = "assumption violation: mass gap";
      write_atomic((fs::path(out_dir) / "assumptions.json").string(), j.dump(2) + "\n");
      log << "assumption violation: source mass is not below the total slope-density mass\n";
      return kAssumptionViolation;
    }
    if (command == "solve") return cmd_solve(cfg, out_dir, log);
    if (command == "solve-weak") return cmd_solve_weak(cfg, out_dir, log);
    if (command == "study") return cmd_study(cfg, out_dir, log);
    return cmd_verify(cfg, assumptions, out_dir, log);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << "\n";
    return kBadConfig;
  } catch (const AssumptionViolation& e) {
    log << "assumption violation: " << e.what() << "\n";
    return kAssumptionViolation;
  } catch (const DegenerateDomain& e) {
    log << "assumption violation: " << e.what() << "\n";
    return kAssumptionViolation;
  } catch (const BracketFailure& e) {
    log << "tolerance failure: " << e.what() << "\n";
    return kToleranceFailure;
  } catch (const MassExceedsTotal& e) {
    log << "assumption violation: " << e.what() << "\n";
    return kAssumptionViolation;
  }
}

}  // namespace masolve::cli
