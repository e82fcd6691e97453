#pragma once

#include <string>
#include <utility>
#include <vector>

#include "masolve/domain.hpp"
#include "masolve/envelope.hpp"
#include "masolve/measures.hpp"
#include "masolve/mesh.hpp"

namespace masolve {

enum class SweepOrder { Index, LargestResidual };

struct SolveConfig {
  /// Per-vertex mass tolerance; <= 0 selects 1e-8 * sum of targets, floored
  /// at 1e-12.
  double mass_tol = 0.0;
  double bisection_tol = 1e-10;
  int max_sweeps = 20000;
  SweepOrder order = SweepOrder::LargestResidual;
  QuadratureConfig quad;
  /// Print one line per sweep to stderr.
  bool log = false;
};

double effective_mass_tol(const SolveConfig& cfg, const std::vector<double>& targets);

struct SolveReport {
  HeightField heights;
  std::vector<double> targets;
  std::vector<double> masses;            // achieved, from the final envelope
  std::vector<double> residual_history;  // max |mass - target| after each sweep
  int sweeps = 0;
  long relaxations = 0;
  double mass_tol = 0.0;
  double bisection_tol = 0.0;
  double lower_bound = 0.0;  // a priori bounds on the solution
  double upper_bound = 0.0;
  bool converged = false;
  bool quadrature_ok = true;
  bool within_bounds = true;
  std::vector<std::string> flags;

  double max_residual() const;
};

/// Supersolution start: every interior height equals max g + 1.
HeightField initial_heights(const Mesh& mesh, const ConvexDomain& domain);

/// Integral of R over the subdifferential cell of interior vertex i.
Integral vertex_mass(const ConvexEnvelope& env, int i, const SlopeDensity& R, const QuadratureConfig& q);

/// Subdifferential at A_i of the envelope when vertex i sits at height z and
/// every other vertex keeps its height: {p : z + p . (A_j - A_i) <= z_j}.
/// Empty (degenerate) when the vertex is above the envelope of the others.
/// Agrees with subdifferential_cell of the rebuilt envelope.
ConvexPolygon local_cell(const Mesh& mesh, const HeightField& heights, int i, double z);

/// Lowers z_i until the mass of vertex i matches `target` within mass_tol,
/// by a bracketed root search on [lower, z_i]. `lower` <= z_i must give
/// mass >= target - mass_tol, else BracketFailure. Returns the new z_i.
double relax_vertex(const Mesh& mesh, HeightField& heights, int i, double target, double lower,
                    const SlopeDensity& R, const SolveConfig& cfg, double mass_tol);

/// a priori bounds (min g - diam * g_R^{-1}(mu(Omega)), max g).
std::pair<double, double> a_priori_bounds(const ConvexDomain& domain, const SlopeDensity& R,
                                          const SourceMeasure& mu);

/// Gauss-Seidel descent to the given targets from `start` (must be
/// admissible: every mass <= target + mass_tol).
SolveReport solve_with_targets(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                               const std::vector<double>& targets, const HeightField& start,
                               std::pair<double, double> bounds, const SolveConfig& cfg);

/// Full classical problem. Throws AssumptionViolation when the source mass is
/// not below the total slope-density mass.
SolveReport solve_classical(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                            const SourceMeasure& mu, const SolveConfig& cfg);

struct WeakReport {
  std::vector<double> deltas;
  std::vector<SolveReport> levels;
  /// gaps[l] = max_i |z_i^l - z_i^{l-1}| for l >= 1 (gaps[0] = 0).
  std::vector<double> gaps;
  int monotonicity_violations = 0;  // increases larger than 2 * bisection_tol
  double max_increase = 0.0;
  bool gaps_decreasing = false;
  HeightField final_heights;
  double cauchy_estimate = 0.0;  // last inter-level gap
};

/// Continuation over a strictly decreasing delta schedule; each level solves
/// against the truncated measure, warm-started from the previous level.
WeakReport solve_weak(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                      const SourceMeasure& mu, const std::vector<double>& delta_schedule, const SolveConfig& cfg);

/// Geometric halving delta0, delta0/2, ... (levels entries).
std::vector<double> halving_schedule(double delta0, int levels);

}  // namespace masolve
