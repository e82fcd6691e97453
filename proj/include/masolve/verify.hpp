#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "masolve/domain.hpp"
#include "masolve/envelope.hpp"
#include "masolve/measures.hpp"
#include "masolve/mesh.hpp"
#include "masolve/solver.hpp"

namespace masolve {

/// Radially symmetric solution on a disk for constant source density f0 and
/// radial R: the subdifferential of B_r is the slope disk of radius u'(r),
/// so g_R(u'(r)) = f0 pi r^2.
struct RadialExactSolution {
  double f0 = 0.0;
  double radius = 1.0;
  double boundary_value = 0.0;
  Point2 center;
  std::vector<double> r;
  std::vector<double> du;
  std::vector<double> u;

  /// u at distance s from the centre (cubic Hermite between samples).
  double value(double s) const;
  double slope(double s) const;
  double operator()(Point2 x) const { return value(norm(x - center)); }
};

/// Tabulates u' = g_R^{-1}(f0 pi r^2) on n_samples uniform radii, integrates
/// by the trapezoid rule and shifts so that u(radius) = boundary_value.
/// Throws MassExceedsTotal when f0 pi radius^2 reaches the total mass of R.
RadialExactSolution radial_exact_solution(const SlopeDensity& R, double f0, int n_samples,
                                          double boundary_value = 0.0, double radius = 1.0,
                                          Point2 center = {});

struct ComparisonReport {
  HeightField low;   // solution for the smaller targets
  HeightField high;  // solution for the larger targets
  double max_violation = 0.0;  // max over vertices of z_high - z_low
  int violations = 0;          // vertices with z_high - z_low > 2 bisection_tol
  int strictly_ordered = 0;    // vertices with z_low - z_high > 2 bisection_tol
  bool both_converged = false;
  bool passed() const { return violations == 0 && both_converged; }
};

/// Solves for both target vectors (targets_low <= targets_high) and checks
/// that the larger measure gives the lower solution.
ComparisonReport comparison_check(const Mesh& mesh, const ConvexDomain& domain, const SlopeDensity& R,
                                  const std::vector<double>& targets_low, const std::vector<double>& targets_high,
                                  const SolveConfig& cfg);

struct MeshSpec {
  int n_boundary = 16;
  double spacing = 0.4;
};

struct ConvergenceRow {
  double h = 0.0;
  int n_boundary = 0;
  double spacing = 0.0;
  double linf_error = 0.0;
  double border_gap = 0.0;
  double runtime_ms = 0.0;
  double max_boundary_facet = 0.0;
  int eval_points = 0;
  int skipped_points = 0;  // grid points of the inner region outside Omega_h
  bool converged = false;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  double delta = 0.0;
  int grid = 201;
  bool errors_decreasing() const;
  bool gaps_decreasing() const;
  bool h_decreasing() const;
};

/// Solves on every mesh and measures max |u_h - u| over a fixed grid of the
/// closed inner region {dist >= delta}, plus the boundary-graph gap.
/// Rows are independent and run through parallel_for.
ConvergenceTable convergence_study(const ConvexDomain& domain, const SlopeDensity& R, const SourceMeasure& mu,
                                   const RadialExactSolution* exact, const std::vector<MeshSpec>& meshes,
                                   double delta, const SolveConfig& cfg, int grid = 201);

/// n_boundary doubling from n0 with spacing 2 pi / n (scaled by the domain's
/// mean semi-axis).
std::vector<MeshSpec> doubling_meshes(const ConvexDomain& domain, int n0, int count);

/// Sampled Hausdorff distance in (x, z) space between the envelope's graph
/// over the outline of Omega_h and the graph of g over the boundary curve.
/// Each side is sampled with n_samples points and measured against the
/// other side's polyline.
double border_gap(const Mesh& mesh, const ConvexDomain& domain, const ConvexEnvelope& env, int n_samples = 4096);

struct MonteCarloCell {
  int vertex = -1;
  double polygon_area = 0.0;
  double estimate = 0.0;
  double box_area = 0.0;
  long samples = 0;
  bool ring_clear = false;  // no slope on the sampling-box boundary passes the oracle
  double relative_error() const;
};

/// Estimates the area of the subdifferential cell of vertex i by sampling
/// membership_oracle uniformly on a box around the cell. Deterministic for a
/// given seed (fixed chunking, one generator per chunk).
MonteCarloCell monte_carlo_cell(const ConvexEnvelope& env, int i, long samples, std::uint64_t seed);

/// Monte-Carlo check on the interior vertex with the largest cell.
MonteCarloCell monte_carlo_largest_cell(const ConvexEnvelope& env, long samples, std::uint64_t seed);

}  // namespace masolve
