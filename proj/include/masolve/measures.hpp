#pragma once

#include <optional>
#include <string>
#include <vector>

#include "masolve/domain.hpp"
#include "masolve/geometry.hpp"
#include "masolve/mesh.hpp"
#include "masolve/quadrature.hpp"

namespace masolve {

/// Lower bound R(p) >= C0 |p|^{-2k} for |p| >= r0.
struct DecayProfile {
  double C0 = 1.0;
  double k = 0.0;
  double r0 = 1.0;
};

/// Positive weight R on slope space.
class SlopeDensity {
 public:
  enum class Kind { Constant, GaussCurvature, PowerTail, Tabulated };

  static SlopeDensity constant(double c);
  /// R(p) = (1 + |p|^2)^(-q)
  static SlopeDensity gauss_curvature(double q);
  /// R(p) = C0 max(|p|, r0)^(-2k)
  static SlopeDensity power_tail(double C0, double k, double r0);
  /// Bilinear interpolation on a rectangular grid, constant extension
  /// outside. values[j * xs.size() + i] is the value at (xs[i], ys[j]).
  static SlopeDensity tabulated(std::vector<double> xs, std::vector<double> ys, std::vector<double> values);
  /// Reads CSV rows `px,py,value` (header optional) forming a full grid.
  static SlopeDensity load_tabulated(const std::string& path);

  Kind kind() const { return kind_; }
  double operator()(Point2 p) const;
  /// R as a function of |p|; only meaningful when radial().
  double radial_value(double r) const;
  bool radial() const { return kind_ != Kind::Tabulated; }
  /// Integral of R over the plane; +inf when divergent.
  double total_mass() const;
  DecayProfile decay() const;

  double c() const { return c_; }
  double q() const { return q_; }

 private:
  Kind kind_ = Kind::Constant;
  double c_ = 1.0;
  double q_ = 2.0;
  double C0_ = 1.0, k_ = 0.0, r0_ = 1.0;
  std::vector<double> xs_, ys_, values_;
};

struct Integral {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

/// Integral of R over a slope-space polygon. Exact area times c for constant
/// R, zero for degenerate cells, adaptive triangle quadrature otherwise.
Integral integrate_R_over_polygon(const SlopeDensity& R, const ConvexPolygon& cell, const QuadratureConfig& q);

/// g_R(rho): integral of R over the disk of radius rho about the origin.
double g_R(const SlopeDensity& R, double rho);
/// Inverse of g_R; throws MassExceedsTotal when m >= total mass.
double g_R_inverse(const SlopeDensity& R, double m);

/// Non-negative source density on the plane.
struct SourceDensity {
  enum class Kind { Zero, Constant, RadialPolynomial };

  Kind kind = Kind::Zero;
  double value = 0.0;                 // Constant
  std::vector<double> coefficients;   // RadialPolynomial: sum c_j |x - center|^j
  Point2 center;

  static SourceDensity zero() { return {}; }
  static SourceDensity constant(double v);
  static SourceDensity radial_polynomial(std::vector<double> coefficients, Point2 center = {});

  double operator()(Point2 x) const;
  bool is_zero() const;
};

struct Atom {
  Point2 x;
  double mass = 0.0;
};

/// Source measure mu = density + atoms, optionally restricted to the inner
/// region {dist(x, boundary) > delta} of a domain.
class SourceMeasure {
 public:
  SourceMeasure() = default;
  SourceMeasure(SourceDensity density, std::vector<Atom> atoms);

  const SourceDensity& density() const { return density_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  /// Truncation depth (0 when untruncated).
  double delta() const { return delta_; }
  const std::optional<ConvexDomain>& truncation_domain() const { return domain_; }

  /// Density including the truncation indicator.
  double density_at(Point2 x) const;
  /// True when x lies in the truncation region (always true if untruncated).
  bool in_support(Point2 x) const;
  bool is_zero() const { return density_.is_zero() && atoms_.empty(); }

  friend SourceMeasure truncate_measure(const SourceMeasure& mu, const ConvexDomain& domain, double delta);

 private:
  SourceDensity density_;
  std::vector<Atom> atoms_;
  std::optional<ConvexDomain> domain_;
  double delta_ = 0.0;
};

/// mu restricted to {dist(x, boundary) > delta}. Truncating twice keeps the
/// larger depth.
SourceMeasure truncate_measure(const SourceMeasure& mu, const ConvexDomain& domain, double delta);

/// mu(Omega): density integrated in polar coordinates about the domain
/// centre, plus atoms inside the domain. A truncation is ignored, so the
/// result bounds the truncated mass from above.
double source_mass(const SourceMeasure& mu, const ConvexDomain& domain, double rel_tol = 1e-12);

/// m_i = integral of hat_i d mu over Omega_h for every interior vertex.
/// `converged` (optional) reports whether every triangle met the tolerance.
std::vector<double> target_masses(const Mesh& mesh, const SourceMeasure& mu, const QuadratureConfig& q,
                                  bool* converged = nullptr);

/// Profile derived from the data when none is supplied: tau and eta from the
/// boundary shape, (C0, k, r0) from R, lambda = 0 with C1p the sampled
/// supremum of the density.
AssumptionProfile derive_profile(const ConvexDomain& domain, const SlopeDensity& R, const SourceMeasure& mu);

struct AssumptionReport {
  double source_mass = 0.0;
  double slope_mass = 0.0;
  bool mass_gap_ok = false;

  double K = 0.0;
  double k = 0.0;
  bool exponent_ok = false;

  bool decay_ok = false;            // sampled R(p) >= C0 |p|^{-2k}
  double source_decay_ratio = 0.0;  // worst mu(e) / (C1p sup dist^lambda |e|)
  bool source_decay_ok = false;
  double parabolic_ratio = 0.0;     // worst gap / (eta |s|^{tau+2})
  bool parabolic_ok = false;

  std::vector<std::string> messages;

  /// The solver refuses to run unless the mass gap holds.
  bool solvable() const { return mass_gap_ok; }
};

AssumptionReport validate_assumptions(const AssumptionProfile& profile, const SlopeDensity& R,
                                      const SourceMeasure& mu, const ConvexDomain& domain);

}  // namespace masolve
