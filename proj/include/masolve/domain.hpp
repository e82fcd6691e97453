#pragma once

#include <span>
#include <utility>
#include <vector>

#include "masolve/geometry.hpp"

namespace masolve {

/// Dirichlet data g on the boundary, as a function of the curve parameter
/// t in [0, 1) and the boundary point x(t).
struct BoundaryData {
  enum class Kind { Constant, Cosine, RadialQuadratic };

  Kind kind = Kind::Constant;
  double offset = 0.0;     // constant value, or additive offset
  double amplitude = 0.0;  // Cosine: amplitude; RadialQuadratic: scale
  int mode = 1;            // Cosine: angular frequency in t
  Point2 center;           // RadialQuadratic: centre of |x - c|^2 / 2

  static BoundaryData constant(double value);
  /// offset + amplitude * cos(2 pi mode t)
  static BoundaryData cosine(double offset, double amplitude, int mode);
  /// offset + scale * |x - center|^2 / 2
  static BoundaryData radial_quadratic(double scale, double offset, Point2 center = {});

  double operator()(double t, Point2 x) const;
};

/// Strictly convex planar domain from a small catalog of shapes, together
/// with its boundary data. All catalog shapes are level sets
/// |dx/a|^p + |dy/b|^p = 1 around a centre, parametrised counter-clockwise.
class ConvexDomain {
 public:
  enum class Shape { Disk, Ellipse, Superellipse };

  static ConvexDomain disk(Point2 center, double radius, BoundaryData g = {});
  static ConvexDomain ellipse(Point2 center, double a, double b, BoundaryData g = {});
  /// Requires exponent >= 2 (the boundary stays strictly convex).
  static ConvexDomain superellipse(Point2 center, double a, double b, double exponent,
                                   BoundaryData g = {});
  /// Polygonal domains are never strictly convex; this always throws
  /// DegenerateDomain after running the strict-convexity check on the
  /// polygon's boundary samples.
  [[noreturn]] static ConvexDomain polygon(std::span<const Point2> vertices);

  Shape shape() const { return shape_; }
  Point2 center() const { return center_; }
  double semi_axis_x() const { return a_; }
  double semi_axis_y() const { return b_; }
  double exponent() const { return p_; }
  const BoundaryData& boundary_data() const { return g_; }
  void set_boundary_data(BoundaryData g) { g_ = g; }

  /// Boundary point at parameter t (period 1, counter-clockwise).
  Point2 boundary(double t) const;
  /// Unit outward normal at parameter t.
  Point2 outward_normal(double t) const;
  /// g at parameter t.
  double g(double t) const { return g_(t, boundary(t)); }

  bool contains(Point2 x) const;
  /// Euclidean distance from x to the boundary curve.
  double dist_to_boundary(Point2 x) const;
  /// Distance from the centre to the boundary along direction angle theta.
  double radius_at(double theta) const;
  double diameter() const;
  /// Min / max of g over dense boundary samples.
  std::pair<double, double> boundary_data_range(int samples = 4096) const;

 private:
  double level(Point2 x) const;

  Shape shape_ = Shape::Disk;
  Point2 center_;
  double a_ = 1.0;
  double b_ = 1.0;
  double p_ = 2.0;
  BoundaryData g_;
};

/// Throws DegenerateDomain unless every consecutive triple of a closed sample
/// cycle turns strictly left (no straight pieces, no reflex turns).
void check_strictly_convex(std::span<const Point2> boundary_samples);

}  // namespace masolve
