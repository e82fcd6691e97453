#include "masolve/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "masolve/errors.hpp"
#include "masolve/parallel.hpp"

namespace masolve {

double effective_mass_tol(const SolveConfig& cfg, const std::vector<double>& targets) {
  if (cfg.mass_tol > 0.0) return cfg.mass_tol;
  const double sum = std::accumulate(targets.begin(), targets.end(), 0.0);
  return std::max(1e-8 * sum, 1e-12);
}

double SolveReport::max_residual() const {
  double r = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) r = std::max(r, std::abs(masses[i] - targets[i]));
  return r;
}

HeightField initial_heights(const Mesh& mesh, const ConvexDomain& domain) {
  HeightField hf;
  hf.boundary = boundary_heights(mesh, domain);
  const double top = hf.boundary.empty() ? 0.0 : *std::max_element(hf.boundary.begin(), hf.boundary.end());
  hf.interior.assign(mesh.num_interior(), top + 1.0);
  return hf;
}

Integral vertex_mass(const ConvexEnvelope& env, int i, const SlopeDensity& R, const QuadratureConfig& q) {
  return integrate_R_over_polygon(R, subdifferential_cell(env, i), q);
}

namespace {

// Other vertices of the mesh sorted by distance from A_i, so the nearest
// constraints cut the cell down first.
class CellEvaluator {
 public:
  explicit CellEvaluator(const Mesh& mesh) : mesh_(mesh), order_(mesh.num_interior()) {}

  const std::vector<int>& neighbours(int i) {
    auto& ord = order_[i];
    if (ord.empty()) {
      const int n = mesh_.num_vertices();
      const Point2 a = mesh_.vertex(i);
      ord.reserve(n - 1);
      for (int j = 0; j < n; ++j) {
        if (j != i) ord.push_back(j);
      }
      std::vector<double> d(n);
      for (int j = 0; j < n; ++j) d[j] = norm(mesh_.vertex(j) - a);
      std::stable_sort(ord.begin(), ord.end(), [&](int x, int y) { return d[x] < d[y]; });
    }
    return ord;
  }

  ConvexPolygon cell(const HeightField& h, int i, double z) {
    const auto& ord = neighbours(i);
    const Point2 a = mesh_.vertex(i);
    double span = 0.0, dmin = std::numeric_limits<double>::infinity();
    for (int j : ord) {
      span = std::max(span, std::abs(h.at(j) - z));
      dmin = std::min(dmin, norm(mesh_.vertex(j) - a));
    }
    double box = std::max(1.0, 2.0 * span / dmin);
    for (int attempt = 0; attempt < 64; ++attempt, box *= 2.0) {
      ConvexPolygon poly = ConvexPolygon::from_ccw({{-box, -box}, {box, -box}, {box, box}, {-box, box}});
      for (int j : ord) {
        const Point2 d = mesh_.vertex(j) - a;
        const double rhs = h.at(j) - z;
        bool cut = false;
        for (const auto& p : poly.vertices()) {
          if (dot(p, d) > rhs) {
            cut = true;
            break;
          }
        }
        if (!cut) continue;
        poly = clip_halfplane(poly, d, rhs);
        if (poly.size() < 3) return ConvexPolygon::degenerate(poly.vertices());
      }
      bool touches = false;
      for (const auto& p : poly.vertices()) {
        if (std::max(std::abs(p.x), std::abs(p.y)) >= box * (1.0 - 1e-12)) touches = true;
      }
      if (!touches) return poly;
    }
    throw std::logic_error("local_cell: cell is unbounded");
  }

 private:
  const Mesh& mesh_;
  std::vector<std::vector<int>> order_;
};

class Relaxer {
 public:
  Relaxer(const Mesh& mesh, const ConvexDomain* domain, const SlopeDensity& R, const SolveConfig& cfg,
          double mass_tol)
      : mesh_(mesh), eval_(mesh), R_(R), cfg_(cfg), tol_(mass_tol),
        diam_(domain ? domain->diameter() : outline_diameter(mesh)) {
    last_step_.assign(mesh.num_interior(), 0.0);
  }

  double mass(const HeightField& h, int i, double z) {
    return integrate_R_over_polygon(R_, eval_.cell(h, i, z), cfg_.quad).value;
  }

  // Lowest height worth considering: with every other height at least zmin,
  // the cell at zmin - diam * g_R^{-1}(target) contains the disk of radius
  // g_R^{-1}(target), hence has mass >= target.
  double floor_height(const HeightField& h, int i, double target) {
    double zmin = std::numeric_limits<double>::infinity();
    for (int j = 0; j < mesh_.num_vertices(); ++j) {
      if (j != i) zmin = std::min(zmin, h.at(j));
    }
    double rho;
    try {
      rho = g_R_inverse(R_, target);
    } catch (const MassExceedsTotal&) {
      throw BracketFailure("relax_vertex: target mass exceeds the total slope-density mass");
    }
    return zmin - diam_ * rho * (1.0 + 1e-12) - cfg_.bisection_tol;
  }

  double relax(HeightField& h, int i, double target, double lower_hint) {
    double hi = h.interior[i];
    double f_hi = mass(h, i, hi) - target;
    if (f_hi >= -tol_) return hi;

    double lo = 0.0, f_lo = 0.0;
    bool have_lo = false;
    double floor = lower_hint;
    bool floor_known = std::isfinite(lower_hint);

    // Expanding search below hi, starting from the previous step length.
    double step = last_step_[i] > 0.0 ? last_step_[i] : 1e-3 * diam_;
    step = std::max(step, cfg_.bisection_tol);
    for (int it = 0; it < 200 && !have_lo; ++it) {
      double z = hi - step;
      if (floor_known && z <= floor) z = floor;
      const double fz = mass(h, i, z) - target;
      if (std::abs(fz) <= tol_) return commit(h, i, z);
      if (fz > 0.0) {
        lo = z;
        f_lo = fz;
        have_lo = true;
        break;
      }
      if (floor_known && z <= floor) {
        throw BracketFailure("relax_vertex: the lower bracket height does not reach the target mass");
      }
      hi = z;
      f_hi = fz;
      step *= 4.0;
      if (!floor_known && step > 16.0 * diam_) {
        floor = floor_height(h, i, target);
        floor_known = true;
      }
    }
    if (!have_lo) throw BracketFailure("relax_vertex: no bracket found");

    // Illinois iteration with a bisection fallback. The scaled values drive
    // the iteration; the true ones are kept for the final secant step.
    double g_lo = f_lo, g_hi = f_hi;
    int side = 0;
    double width_mark = hi - lo;
    bool bisect = false;
    for (int it = 0; it < 400 && hi - lo > cfg_.bisection_tol; ++it) {
      double z = lo - f_lo * (hi - lo) / (f_hi - f_lo);
      if (bisect || !(z > lo && z < hi)) z = 0.5 * (lo + hi);
      bisect = false;
      const double fz = mass(h, i, z) - target;
      if (std::abs(fz) <= tol_) return commit(h, i, z);
      if (fz < 0.0) {
        hi = z;
        f_hi = g_hi = fz;
        if (side == -1) f_lo *= 0.5;
        side = -1;
      } else {
        lo = z;
        f_lo = g_lo = fz;
        if (side == 1) f_hi *= 0.5;
        side = 1;
      }
      if (it % 3 == 2) {
        if (hi - lo > 0.5 * width_mark) bisect = true;
        width_mark = hi - lo;
      }
    }
    // The bracket is below bisection_tol. One secant step inside it resolves
    // corrections smaller than the bracket; it is taken only if admissible,
    // otherwise the upper end keeps the vertex admissible.
    if (g_hi < g_lo) {
      const double z = lo - g_lo * (hi - lo) / (g_hi - g_lo);
      if (z > lo && z < hi) {
        const double fz = mass(h, i, z) - target;
        if (fz <= tol_ && fz > g_hi) return commit(h, i, z);
      }
    }
    return commit(h, i, hi);
  }

  CellEvaluator& evaluator() { return eval_; }

 private:
  static double outline_diameter(const Mesh& mesh) {
    double d = 0.0;
    for (int a = 0; a < mesh.num_vertices(); ++a) {
      for (int b = a + 1; b < mesh.num_vertices(); ++b) d = std::max(d, norm(mesh.vertex(a) - mesh.vertex(b)));
    }
    return d;
  }

  double commit(HeightField& h, int i, double z) {
    const double step = h.interior[i] - z;
    if (step > 0.0) last_step_[i] = step;
    h.interior[i] = z;
    return z;
  }

  const Mesh& mesh_;
  CellEvaluator eval_;
  const SlopeDensity& R_;
  const SolveConfig& cfg_;
  double tol_;
  double diam_;
  std::vector<double> last_step_;
};

}  // namespace

ConvexPolygon local_cell(const Mesh& mesh, const HeightField& heights, int i, double z) {
  CellEvaluator ev(mesh);
  return ev.cell(heights, i, z);
}

double relax_vertex(const Mesh& mesh, HeightField& heights, int i, double target, double lower,
                    const SlopeDensity& R, const SolveConfig& cfg, double mass_tol) {
  Relaxer rx(mesh, nullptr, R, cfg, mass_tol);
  return rx.relax(heights, i, target, lower);
}

std::pair<double, double> a_priori_bounds(const ConvexDomain& domain, const SlopeDensity& R,
                                          const SourceMeasure& mu) {
  const auto [gmin, gmax] = domain.boundary_data_range();
  const double omega0 = source_mass(mu, domain);
  return {gmin - domain.diameter() * g_R_inverse(R, omega0), gmax};
}

SolveReport solve_with_targets(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                               const std::vector<double>& targets, const HeightField& start,
                               std::pair<double, double> bounds, const SolveConfig& cfg) {
  const int k = mesh.num_interior();
  SolveReport rep;
  rep.targets = targets;
  rep.heights = start;
  rep.mass_tol = effective_mass_tol(cfg, targets);
  rep.bisection_tol = cfg.bisection_tol;
  rep.lower_bound = bounds.first;
  rep.upper_bound = bounds.second;
  // The relaxation aims slightly inside mass_tol: the final masses come from
  // the rebuilt envelope and differ from the relaxation's by rounding.
  const double tol = 0.99 * rep.mass_tol;

  Relaxer rx(mesh, &domain, R, cfg, tol);
  std::vector<double> mass(k, 0.0);
  auto refresh = [&] {
    for (int i = 0; i < k; ++i) rx.evaluator().neighbours(i);  // fill caches before threads read them
    parallel_for(k, [&](int i) {
      const Integral r = integrate_R_over_polygon(R, rx.evaluator().cell(rep.heights, i, rep.heights.interior[i]), cfg.quad);
      mass[i] = r.value;
    });
    double worst = 0.0;
    for (int i = 0; i < k; ++i) worst = std::max(worst, std::abs(mass[i] - targets[i]));
    return worst;
  };

  double worst = refresh();
  std::vector<int> order(k);
  while (worst > tol && rep.sweeps < cfg.max_sweeps) {
    std::iota(order.begin(), order.end(), 0);
    if (cfg.order == SweepOrder::LargestResidual) {
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return targets[a] - mass[a] > targets[b] - mass[b]; });
    }
    bool moved = false;
    for (int i : order) {
      if (targets[i] - mass[i] <= tol) continue;
      const double before = rep.heights.interior[i];
      rx.relax(rep.heights, i, targets[i], -std::numeric_limits<double>::infinity());
      ++rep.relaxations;
      if (rep.heights.interior[i] != before) moved = true;
    }
    ++rep.sweeps;
    worst = refresh();
    rep.residual_history.push_back(worst);
    if (cfg.log) std::fprintf(stderr, "sweep %d max residual %.6e\n", rep.sweeps, worst);
    if (!moved) {
      rep.flags.push_back("stagnation: no height changed during a sweep");
      break;
    }
  }
  rep.converged = worst <= tol;
  if (!rep.converged && rep.sweeps >= cfg.max_sweeps) rep.flags.push_back("max sweeps exceeded");

  // Report masses from the rebuilt envelope; inactive heights are lowered
  // onto the envelope, which leaves every cell unchanged. Quadrature status
  // refers to these final cells (bracketing probes may use huge cells).
  const ConvexEnvelope env(mesh, rep.heights);
  rep.masses.assign(k, 0.0);
  std::vector<char> quad_ok(k, 1);
  parallel_for(k, [&](int i) {
    const Integral r = vertex_mass(env, i, R, cfg.quad);
    rep.masses[i] = r.value;
    quad_ok[i] = r.converged;
  });
  double final_worst = 0.0;
  for (int i = 0; i < k; ++i) final_worst = std::max(final_worst, std::abs(rep.masses[i] - targets[i]));
  if (rep.converged && final_worst > rep.mass_tol) {
    rep.converged = false;
    rep.flags.push_back("final envelope masses miss mass_tol (quadrature noise above the tolerance)");
  }
  rep.quadrature_ok = std::all_of(quad_ok.begin(), quad_ok.end(), [](char c) { return c != 0; });
  if (!rep.quadrature_ok) rep.flags.push_back("quadrature tolerance not met");
  for (int i = 0; i < k; ++i) {
    if (!env.hull_vertex(i)) rep.heights.interior[i] = std::min(rep.heights.interior[i], env.vertex_value(i));
  }
  rep.within_bounds = true;
  for (double z : rep.heights.interior) {
    if (z < rep.lower_bound - cfg.bisection_tol || z > rep.upper_bound) rep.within_bounds = false;
  }
  if (!rep.within_bounds) rep.flags.push_back("height outside the a priori bounds");
  return rep;
}

SolveReport solve_classical(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                            const SourceMeasure& mu, const SolveConfig& cfg) {
  const double omega0 = source_mass(mu, domain);
  const double total = R.total_mass();
  if (!(std::isinf(total) || omega0 < total * (1.0 - 1e-9))) {
    throw AssumptionViolation("source mass is not below the total slope-density mass");
  }
  bool quad_ok = true;
  const auto targets = target_masses(mesh, mu, cfg.quad, &quad_ok);
  SolveReport rep = solve_with_targets(mesh, domain, R, targets, initial_heights(mesh, domain),
                                       a_priori_bounds(domain, R, mu), cfg);
  if (!quad_ok) {
    rep.quadrature_ok = false;
    rep.flags.push_back("target quadrature tolerance not met");
  }
  return rep;
}

WeakReport solve_weak(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                      const SourceMeasure& mu, const std::vector<double>& delta_schedule, const SolveConfig& cfg) {
  if (delta_schedule.empty()) throw std::invalid_argument("solve_weak: empty delta schedule");
  for (std::size_t l = 0; l < delta_schedule.size(); ++l) {
    if (!(delta_schedule[l] > 0.0) || (l > 0 && !(delta_schedule[l] < delta_schedule[l - 1]))) {
      throw std::invalid_argument("solve_weak: delta schedule must be positive and strictly decreasing");
    }
  }
  const double omega0 = source_mass(mu, domain);
  const double total = R.total_mass();
  if (!(std::isinf(total) || omega0 < total * (1.0 - 1e-9))) {
    throw AssumptionViolation("source mass is not below the total slope-density mass");
  }
  const auto bounds = a_priori_bounds(domain, R, mu);

  WeakReport wr;
  wr.deltas = delta_schedule;
  HeightField current = initial_heights(mesh, domain);
  for (std::size_t l = 0; l < delta_schedule.size(); ++l) {
    const SourceMeasure mu_d = truncate_measure(mu, domain, delta_schedule[l]);
    bool quad_ok = true;
    const auto targets = target_masses(mesh, mu_d, cfg.quad, &quad_ok);
    SolveReport rep = solve_with_targets(mesh, domain, R, targets, current, bounds, cfg);
    if (!quad_ok) {
      rep.quadrature_ok = false;
      rep.flags.push_back("target quadrature tolerance not met");
    }
    double gap = 0.0;
    if (l > 0) {
      const auto& prev = wr.levels.back().heights.interior;
      for (int i = 0; i < mesh.num_interior(); ++i) {
        const double diff = rep.heights.interior[i] - prev[i];
        gap = std::max(gap, std::abs(diff));
        wr.max_increase = std::max(wr.max_increase, diff);
        if (diff > 2.0 * cfg.bisection_tol) ++wr.monotonicity_violations;
      }
    }
    wr.gaps.push_back(gap);
    current = rep.heights;
    wr.levels.push_back(std::move(rep));
  }
  wr.gaps_decreasing = true;
  for (std::size_t l = 2; l < wr.gaps.size(); ++l) {
    if (!(wr.gaps[l] < wr.gaps[l - 1])) wr.gaps_decreasing = false;
  }
  wr.final_heights = current;
  wr.cauchy_estimate = wr.gaps.back();
  return wr;
}

std::vector<double> halving_schedule(double delta0, int levels) {
  std::vector<double> s;
  for (int l = 0; l < levels; ++l) s.push_back(std::ldexp(delta0, -l));
  return s;
}

}  // namespace masolve
