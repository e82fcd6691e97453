#include "masolve/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "masolve/errors.hpp"
#include "masolve/parallel.hpp"

namespace masolve {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------------------
// Radial exact solution

double RadialExactSolution::value(double s) const {
  if (r.size() < 2) return boundary_value;
  s = std::clamp(s, 0.0, r.back());
  const double dr = r[1] - r[0];
  std::size_t j = std::min(static_cast<std::size_t>(s / dr), r.size() - 2);
  const double t = (s - r[j]) / dr;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * u[j] + h10 * dr * du[j] + h01 * u[j + 1] + h11 * dr * du[j + 1];
}

double RadialExactSolution::slope(double s) const {
  if (r.size() < 2) return 0.0;
  s = std::clamp(s, 0.0, r.back());
  const double dr = r[1] - r[0];
  std::size_t j = std::min(static_cast<std::size_t>(s / dr), r.size() - 2);
  const double t = (s - r[j]) / dr;
  return (1 - t) * du[j] + t * du[j + 1];
}

RadialExactSolution radial_exact_solution(const SlopeDensity& R, double f0, int n_samples, double boundary_value,
                                          double radius, Point2 center) {
  if (!R.radial()) throw std::invalid_argument("radial_exact_solution: R must be radially symmetric");
  if (!(f0 >= 0.0)) throw std::invalid_argument("radial_exact_solution: f0 must be non-negative");
  if (n_samples < 2) throw std::invalid_argument("radial_exact_solution: need at least two samples");
  if (f0 * kPi * radius * radius >= R.total_mass()) {
    throw MassExceedsTotal("radial_exact_solution: source mass reaches the total slope-density mass");
  }
  RadialExactSolution sol;
  sol.f0 = f0;
  sol.radius = radius;
  sol.boundary_value = boundary_value;
  sol.center = center;
  sol.r.resize(n_samples);
  sol.du.resize(n_samples);
  sol.u.assign(n_samples, 0.0);
  for (int j = 0; j < n_samples; ++j) {
    sol.r[j] = radius * j / (n_samples - 1);
    sol.du[j] = g_R_inverse(R, f0 * kPi * sol.r[j] * sol.r[j]);
  }
  for (int j = 1; j < n_samples; ++j) {
    sol.u[j] = sol.u[j - 1] + 0.5 * (sol.r[j] - sol.r[j - 1]) * (sol.du[j] + sol.du[j - 1]);
  }
  const double shift = boundary_value - sol.u.back();
  for (double& v : sol.u) v += shift;
  return sol;
}

// ---------------------------------------------------------------------------
// Comparison

ComparisonReport comparison_check(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                                  const std::vector<double>& targets_low, const std::vector<double>& targets_high,
                                  const SolveConfig& cfg) {
  const int k = mesh.num_interior();
  if (static_cast<int>(targets_low.size()) != k || static_cast<int>(targets_high.size()) != k) {
    throw std::invalid_argument("comparison_check: target vectors do not match the mesh");
  }
  for (int i = 0; i < k; ++i) {
    if (targets_low[i] > targets_high[i]) throw std::invalid_argument("comparison_check: targets_low > targets_high");
  }
  const auto [gmin, gmax] = domain.boundary_data_range();
  double sum_high = 0.0;
  for (double m : targets_high) sum_high += m;
  double lower = -std::numeric_limits<double>::infinity();
  try {
    lower = gmin - domain.diameter() * g_R_inverse(R, sum_high);
  } catch (const MassExceedsTotal&) {
  }
  const HeightField start = initial_heights(mesh, domain);
  const SolveReport lo = solve_with_targets(mesh, domain, R, targets_low, start, {lower, gmax}, cfg);
  const SolveReport hi = solve_with_targets(mesh, domain, R, targets_high, start, {lower, gmax}, cfg);
  ComparisonReport rep;
  rep.low = lo.heights;
  rep.high = hi.heights;
  rep.both_converged = lo.converged && hi.converged;
  rep.max_violation = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const double diff = hi.heights.interior[i] - lo.heights.interior[i];
    rep.max_violation = std::max(rep.max_violation, diff);
    if (diff > 2.0 * cfg.bisection_tol) ++rep.violations;
    if (-diff > 2.0 * cfg.bisection_tol) ++rep.strictly_ordered;
  }
  if (k == 0) rep.max_violation = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Border gap

namespace {

struct P3 {
  double x, y, z;
};

double dist_point_segment(const P3& p, const P3& a, const P3& b) {
  const double ux = b.x - a.x, uy = b.y - a.y, uz = b.z - a.z;
  const double wx = p.x - a.x, wy = p.y - a.y, wz = p.z - a.z;
  const double uu = ux * ux + uy * uy + uz * uz;
  double t = uu > 0.0 ? (wx * ux + wy * uy + wz * uz) / uu : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double dx = wx - t * ux, dy = wy - t * uy, dz = wz - t * uz;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

// Largest distance from a sample of `from` to the closed polyline `to`.
double directed_gap(const std::vector<P3>& from, const std::vector<P3>& to) {
  std::vector<double> best(from.size());
  parallel_for(static_cast<int>(from.size()), [&](int s) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t e = 0; e < to.size(); ++e) d = std::min(d, dist_point_segment(from[s], to[e], to[(e + 1) % to.size()]));
    best[s] = d;
  });
  return best.empty() ? 0.0 : *std::max_element(best.begin(), best.end());
}

}  // namespace

double border_gap(const Mesh& mesh, const ConvexDomain& domain, const ConvexEnvelope& env, int n_samples) {
  n_samples = std::max(n_samples, 512);
  const auto& bv = mesh.boundary_vertices();
  const int m = mesh.num_boundary();
  // Outline samples distributed over the edges in proportion to length.
  double perimeter = 0.0;
  for (int j = 0; j < m; ++j) perimeter += norm(bv[(j + 1) % m] - bv[j]);
  std::vector<P3> sh;
  sh.reserve(n_samples + m);
  for (int j = 0; j < m; ++j) {
    const Point2 a = bv[j], b = bv[(j + 1) % m];
    const int pieces = std::max(1, static_cast<int>(std::round(n_samples * norm(b - a) / perimeter)));
    for (int s = 0; s < pieces; ++s) {
      const Point2 x = a + (double(s) / pieces) * (b - a);
      sh.push_back({x.x, x.y, evaluate(env, x)});
    }
  }
  std::vector<P3> s0;
  s0.reserve(n_samples);
  for (int s = 0; s < n_samples; ++s) {
    const double t = double(s) / n_samples;
    const Point2 x = domain.boundary(t);
    s0.push_back({x.x, x.y, domain.g(t)});
  }
  return std::max(directed_gap(sh, s0), directed_gap(s0, sh));
}

// ---------------------------------------------------------------------------
// Convergence study

bool ConvergenceTable::errors_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].linf_error < rows[i - 1].linf_error)) return false;
  }
  return true;
}

bool ConvergenceTable::gaps_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].border_gap < rows[i - 1].border_gap)) return false;
  }
  return true;
}

bool ConvergenceTable::h_decreasing() const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (!(rows[i].h < rows[i - 1].h)) return false;
  }
  return true;
}

std::vector<MeshSpec> doubling_meshes(const ConvexDomain& domain, int n0, int count) {
  std::vector<MeshSpec> out;
  const double scale = 0.5 * (domain.semi_axis_x() + domain.semi_axis_y());
  for (int l = 0, n = n0; l < count; ++l, n *= 2) out.push_back({n, 2.0 * kPi * scale / n});
  return out;
}

ConvergenceTable convergence_study(const ConvexDomain& domain, const SlopeDensity& R, const SourceMeasure& mu,
                                   const RadialExactSolution* exact, const std::vector<MeshSpec>& meshes,
                                   double delta, const SolveConfig& cfg, int grid) {
  ConvergenceTable table;
  table.delta = delta;
  table.grid = grid;
  table.rows.resize(meshes.size());

  // Fixed evaluation grid of the closed inner region, shared by all rows.
  std::vector<Point2> pts;
  const Point2 c = domain.center();
  const double hx = domain.semi_axis_x(), hy = domain.semi_axis_y();
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const Point2 x = c + Point2{-hx + 2 * hx * i / (grid - 1), -hy + 2 * hy * j / (grid - 1)};
      if (domain.contains(x) && domain.dist_to_boundary(x) >= delta) pts.push_back(x);
    }
  }

  // Rows run one after another; the solver parallelises inside each row.
  for (std::size_t r = 0; r < meshes.size(); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh mesh = build_mesh(domain, meshes[r].n_boundary, meshes[r].spacing);
    const SolveReport rep = solve_classical(mesh, domain, R, mu, cfg);
    const ConvexEnvelope env(mesh, rep.heights);
    ConvergenceRow& row = table.rows[r];
    row.h = mesh.h();
    row.n_boundary = meshes[r].n_boundary;
    row.spacing = meshes[r].spacing;
    row.converged = rep.converged;
    row.max_boundary_facet = max_boundary_facet_diameter(mesh);
    if (exact) {
      std::vector<double> err(pts.size(), 0.0);
      std::vector<char> inside(pts.size(), 1);
      parallel_for(static_cast<int>(pts.size()), [&](int p) {
        try {
          err[p] = std::abs(evaluate(env, pts[p]) - (*exact)(pts[p]));
        } catch (const OutsideDomain&) {
          inside[p] = 0;
        }
      });
      for (std::size_t p = 0; p < pts.size(); ++p) {
        if (inside[p]) {
          row.linf_error = std::max(row.linf_error, err[p]);
          ++row.eval_points;
        } else {
          ++row.skipped_points;
        }
      }
    }
    row.border_gap = border_gap(mesh, domain, env);
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
  return table;
}

// ---------------------------------------------------------------------------
// Monte-Carlo cell areas

double MonteCarloCell::relative_error() const {
  if (polygon_area == 0.0) return estimate == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(estimate - polygon_area) / polygon_area;
}

MonteCarloCell monte_carlo_cell(const ConvexEnvelope& env, int i, long samples, std::uint64_t seed) {
  MonteCarloCell mc;
  mc.vertex = i;
  mc.samples = samples;
  const ConvexPolygon cell = subdifferential_cell(env, i);
  mc.polygon_area = polygon_area(cell);
  if (cell.empty()) return mc;
  double x0 = cell.vertices()[0].x, x1 = x0, y0 = cell.vertices()[0].y, y1 = y0;
  for (const auto& p : cell.vertices()) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  // Box: the bounding box enlarged by 25% in each direction.
  const double cx = 0.5 * (x0 + x1), cy = 0.5 * (y0 + y1);
  const double wx = std::max(0.625 * (x1 - x0), 1e-12), wy = std::max(0.625 * (y1 - y0), 1e-12);
  mc.box_area = 4.0 * wx * wy;

  constexpr long kChunk = 1 << 16;
  const long chunks = (samples + kChunk - 1) / kChunk;
  std::vector<long> hits(chunks, 0);
  parallel_for(static_cast<int>(chunks), [&](int ch) {
    std::mt19937_64 gen(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(ch + 1));
    std::uniform_real_distribution<double> ux(cx - wx, cx + wx), uy(cy - wy, cy + wy);
    const long n = std::min(kChunk, samples - ch * kChunk);
    long h = 0;
    for (long s = 0; s < n; ++s) {
      const double px = ux(gen);
      const double py = uy(gen);
      if (membership_oracle(env, i, {px, py})) ++h;
    }
    hits[ch] = h;
  });
  long total = 0;
  for (long h : hits) total += h;
  mc.estimate = mc.box_area * static_cast<double>(total) / static_cast<double>(samples);

  mc.ring_clear = true;
  constexpr int kRing = 256;
  for (int s = 0; s < kRing && mc.ring_clear; ++s) {
    const double t = double(s) / kRing;
    const Point2 ring[4] = {{cx - wx + 2 * wx * t, cy - wy}, {cx + wx, cy - wy + 2 * wy * t},
                            {cx + wx - 2 * wx * t, cy + wy}, {cx - wx, cy + wy - 2 * wy * t}};
    for (const auto& p : ring) {
      if (membership_oracle(env, i, p)) mc.ring_clear = false;
    }
  }
  return mc;
}

MonteCarloCell monte_carlo_largest_cell(const ConvexEnvelope& env, long samples, std::uint64_t seed) {
  const int k = env.source_mesh().num_interior();
  int best = -1;
  double best_area = -1.0;
  for (int i = 0; i < k; ++i) {
    const double a = polygon_area(subdifferential_cell(env, i));
    if (a > best_area) {
      best_area = a;
      best = i;
    }
  }
  if (best < 0) return {};
  return monte_carlo_cell(env, best, samples, seed);
}

}  // namespace masolve
