#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "masolve/cli.hpp"
#include "masolve/domain.hpp"
#include "masolve/envelope.hpp"
#include "masolve/measures.hpp"
#include "masolve/mesh.hpp"
#include "masolve/parallel.hpp"
#include "masolve/solver.hpp"
#include "masolve/verify.hpp"

using namespace masolve;
using std::numbers::pi;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

ConvexDomain disk_fixture() { return ConvexDomain::disk({}, 1.0, BoundaryData::constant(0.5)); }
SourceMeasure unit_density() { return SourceMeasure(SourceDensity::constant(1.0), {}); }

SolveConfig tight_config() {
  SolveConfig cfg;
  cfg.mass_tol = 1e-13;
  cfg.bisection_tol = 1e-10;
  return cfg;
}

Mesh disk_mesh(int n) { return build_mesh(disk_fixture(), n, 2 * pi / n); }

Outcome cone_fixture() {
  const auto t0 = Clock::now();
  const Mesh mesh({{0.0, 0.0}}, {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}, {{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 1}});
  const auto square_hull = ConvexDomain::disk({}, std::sqrt(2.0));  // same diameter as the square
  SolveConfig cfg;
  cfg.mass_tol = 1e-12;
  cfg.bisection_tol = 1e-12;
  const HeightField start{{0.5}, {0, 0, 0, 0}};
  const SolveReport rep =
      solve_with_targets(mesh, square_hull, SlopeDensity::constant(1.0), {0.08}, start, {-10.0, 0.0}, cfg);
  const ConvexEnvelope env(mesh, rep.heights);
  const double z = rep.heights.interior[0];
  const double area = polygon_area(subdifferential_cell(env, 0));
  const double secs = seconds_since(t0);
  const bool ok = rep.converged && std::abs(z + 0.2) <= 1e-6 && std::abs(area - 0.08) <= 1e-9 && secs < 1.0;
  return {ok, "height " + sci(z) + " (|err| " + sci(std::abs(z + 0.2)) + "), area err " +
                  sci(std::abs(area - 0.08)) + ", " + sci(secs) + " s"};
}

Outcome monte_carlo_envelopes() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  int failures = 0;
  const int trials = 20;
  for (int trial = 0; trial < trials; ++trial) {
    const int nb = 8 + static_cast<int>(u(rng) * 8);
    const int ni = 10 + static_cast<int>(u(rng) * 30);  // at most 50 vertices
    std::vector<double> angles(nb);
    for (auto& a : angles) a = 2 * pi * u(rng);
    std::sort(angles.begin(), angles.end());
    std::vector<Point2> boundary, interior;
    for (double a : angles) boundary.push_back({std::cos(a), std::sin(a)});
    const auto outline = convex_hull_2d(boundary);
    if (outline.size() != boundary.size()) {
      --trial;
      continue;
    }
    while (static_cast<int>(interior.size()) < ni) {
      const Point2 p{2 * u(rng) - 1, 2 * u(rng) - 1};
      if (outline.contains(p, -0.02)) interior.push_back(p);
    }
    std::vector<Point2> all = interior;
    all.insert(all.end(), boundary.begin(), boundary.end());
    const Mesh mesh(interior, boundary, delaunay_triangulation(all));
    HeightField hf;
    for (const auto& p : interior) hf.interior.push_back(0.5 * dot(p, p) + 0.05 * (u(rng) - 0.5));
    for (const auto& p : boundary) hf.boundary.push_back(0.5 * dot(p, p));
    const ConvexEnvelope env(mesh, hf);
    const MonteCarloCell mc = monte_carlo_largest_cell(env, 1000000, 17 + trial);
    worst = std::max(worst, mc.relative_error());
    if (!mc.ring_clear || mc.relative_error() > 0.01) ++failures;
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < 60.0,
          std::to_string(trials) + " envelopes, worst rel err " + sci(worst) + ", " + sci(secs) + " s"};
}

Outcome study_outcome(const ConvexDomain& dom, const SlopeDensity& R, double f0, double boundary_value) {
  const auto t0 = Clock::now();
  const auto exact = radial_exact_solution(R, f0, 4001, boundary_value);
  const SourceMeasure mu(SourceDensity::constant(f0), {});
  const auto table = convergence_study(dom, R, mu, &exact, doubling_meshes(dom, 16, 3), 0.2, tight_config());
  const double secs = seconds_since(t0);
  std::string errs;
  bool converged = true;
  for (const auto& r : table.rows) {
    errs += sci(r.linf_error) + " ";
    converged = converged && r.converged;
  }
  const bool halved = table.rows.back().linf_error < 0.5 * table.rows.front().linf_error;
  return {converged && table.errors_decreasing() && halved && secs < 300.0,
          "Linf errors " + errs + "(" + sci(secs) + " s)"};
}

Outcome mass_balance() {
  const auto dom = disk_fixture();
  const Mesh mesh = disk_mesh(32);
  const SolveReport rep = solve_classical(mesh, dom, SlopeDensity::constant(1.0), unit_density(), tight_config());
  double st = 0.0, sm = 0.0;
  for (double t : rep.targets) st += t;
  for (double m : rep.masses) sm += m;
  const double allowed = mesh.num_interior() * rep.mass_tol;
  const bool balanced = std::abs(st - sm) <= allowed;

  const auto dir = std::filesystem::temp_directory_path() / "masolve_acceptance_gap";
  std::filesystem::create_directories(dir);
  const auto cfg = dir / "config.json";
  std::ofstream(cfg) << R"({"domain": {"kind": "disk", "radius": 1.0},
    "slope_density": {"kind": "gauss_curvature", "q": 2},
    "source": {"density": {"kind": "constant", "value": 1.0}}})";
  std::ostringstream log;
  const int code = cli::run("solve", cfg.string(), (dir / "out").string(), {}, log);
  std::filesystem::remove_all(dir);
  return {balanced && code == 2, "|sum m - sum target| " + sci(std::abs(st - sm)) + " <= " + sci(allowed) +
                                     ", mass-gap config exit code " + std::to_string(code)};
}

Outcome comparison_pairs() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto dom = ConvexDomain::disk({}, 1.0, BoundaryData::cosine(0.2, 0.3, 1));
  const Mesh mesh = build_mesh(dom, 16, 2 * pi / 16);
  const auto cfg = tight_config();
  int violations = 0;
  double worst = -1e300;
  bool converged = true;
  for (int pair = 0; pair < 10; ++pair) {
    std::vector<double> low(mesh.num_interior()), high(mesh.num_interior());
    for (int i = 0; i < mesh.num_interior(); ++i) {
      low[i] = 0.05 * u(rng);
      high[i] = low[i] * (1.0 + u(rng)) + 0.01 * u(rng) * (u(rng) < 0.5);
    }
    const ComparisonReport cr = comparison_check(mesh, dom, SlopeDensity::constant(1.0), low, high, cfg);
    violations += cr.violations;
    worst = std::max(worst, cr.max_violation);
    converged = converged && cr.both_converged;
  }
  return {violations == 0 && converged,
          "10 pairs, violations " + std::to_string(violations) + ", max (z' - z) " + sci(worst)};
}

Outcome a_priori() {
  const auto R = SlopeDensity::constant(1.0);
  const double tol = 1e-10;
  const bool inverse_ok = std::abs(g_R_inverse(R, pi) - 1.0) <= 1e-12;
  int outside = 0;
  int checked = 0;
  for (const auto& dom : {disk_fixture(), ConvexDomain::disk({}, 1.0, BoundaryData::cosine(0.0, 0.4, 2)),
                          ConvexDomain::ellipse({}, 1.2, 0.8, BoundaryData::cosine(0.1, 0.2, 1))}) {
    const Mesh mesh = build_mesh(dom, 32, 2 * pi / 32);
    const SolveReport rep = solve_classical(mesh, dom, R, unit_density(), tight_config());
    const auto [gmin, gmax] = dom.boundary_data_range();
    const double lo = gmin - dom.diameter() * g_R_inverse(R, source_mass(unit_density(), dom));
    for (double z : rep.heights.interior) {
      ++checked;
      if (z < lo - tol || z > gmax) ++outside;
    }
  }
  return {inverse_ok && outside == 0,
          std::to_string(checked) + " heights checked, " + std::to_string(outside) + " outside the bounds"};
}

Outcome delta_schedule() {
  const auto dom = disk_fixture();
  const Mesh mesh = disk_mesh(32);
  const auto cfg = tight_config();
  const WeakReport wr =
      solve_weak(mesh, dom, SlopeDensity::constant(1.0), unit_density(), {0.4, 0.2, 0.1, 0.05}, cfg);
  int violations = 0;
  for (std::size_t l = 1; l < wr.levels.size(); ++l) {
    for (int i = 0; i < mesh.num_interior(); ++i) {
      if (wr.levels[l].heights.interior[i] > wr.levels[l - 1].heights.interior[i] + 2 * cfg.bisection_tol) {
        ++violations;
      }
    }
  }
  bool gaps_down = true;
  for (std::size_t l = 2; l < wr.gaps.size(); ++l) gaps_down = gaps_down && wr.gaps[l] < wr.gaps[l - 1];
  std::string gaps;
  for (std::size_t l = 1; l < wr.gaps.size(); ++l) gaps += sci(wr.gaps[l]) + " ";
  return {violations == 0 && gaps_down,
          "violations " + std::to_string(violations) + ", inter-level gaps " + gaps};
}

Outcome sweep_orders() {
  const auto dom = disk_fixture();
  const Mesh mesh = disk_mesh(32);
  SolveConfig a = tight_config();
  a.order = SweepOrder::Index;
  SolveConfig b = tight_config();
  b.order = SweepOrder::LargestResidual;
  const auto R = SlopeDensity::constant(1.0);
  const SolveReport ra = solve_classical(mesh, dom, R, unit_density(), a);
  const SolveReport rb = solve_classical(mesh, dom, R, unit_density(), b);
  double diff = 0.0;
  for (int i = 0; i < mesh.num_interior(); ++i) {
    diff = std::max(diff, std::abs(ra.heights.interior[i] - rb.heights.interior[i]));
  }
  return {ra.converged && rb.converged && diff <= 2 * a.bisection_tol,
          "max height difference " + sci(diff) + " (limit " + sci(2 * a.bisection_tol) + ")"};
}

Outcome boundary_refinement() {
  const auto dom = ConvexDomain::disk({}, 1.0, BoundaryData::cosine(0.0, 0.3, 1));
  const auto table = convergence_study(dom, SlopeDensity::constant(1.0), unit_density(), nullptr,
                                       doubling_meshes(dom, 16, 3), 0.2, tight_config(), 51);
  bool facets_down = true;
  std::string detail;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (r > 0) facets_down = facets_down && table.rows[r].max_boundary_facet < table.rows[r - 1].max_boundary_facet;
    detail += "(" + sci(table.rows[r].max_boundary_facet) + ", " + sci(table.rows[r].border_gap) + ") ";
  }
  return {facets_down && table.gaps_decreasing(), "(facet, gap) per mesh " + detail};
}

}  // namespace

int main() {
  if (const char* env = std::getenv("MASOLVE_THREADS")) set_num_threads(std::max(1, std::atoi(env)));
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"cone fixture", cone_fixture},
      {"cell area vs Monte Carlo", monte_carlo_envelopes},
      {"disk convergence, R = 1",
       [] { return study_outcome(disk_fixture(), SlopeDensity::constant(1.0), 1.0, 0.5); }},
      {"disk convergence, curvature kernel",
       [] { return study_outcome(ConvexDomain::disk({}, 1.0), SlopeDensity::gauss_curvature(2.0), 0.5, 0.0); }},
      {"mass balance and mass-gap refusal", mass_balance},
      {"comparison principle", comparison_pairs},
      {"a priori bounds", a_priori},
      {"delta schedule monotonicity", delta_schedule},
      {"sweep-order independence", sweep_orders},
      {"boundary refinement", boundary_refinement},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s [%zu] %s: %s\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
