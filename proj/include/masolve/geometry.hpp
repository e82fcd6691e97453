#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

namespace masolve {

/// Relative tolerance for 2D collinearity tests.
inline constexpr double kEpsGeom = 1e-12;
/// Relative tolerance for coplanarity of lifted points.
inline constexpr double kEpsHull = 1e-9;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point2 a, Point2 b) = default;
};

constexpr double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }

/// Twice the signed area of (a, b, c); positive for counter-clockwise order.
constexpr double orient(Point2 a, Point2 b, Point2 c) { return cross(b - a, c - a); }

constexpr bool lex_less(Point2 a, Point2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); }

/// Convex polygon with counter-clockwise, pairwise distinct, extreme vertices.
///
/// A polygon with fewer than three vertices (a point, a segment, or nothing)
/// is only representable through the explicit degenerate constructor.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;

  /// Takes ownership of a vertex cycle already known to be convex and ccw.
  static ConvexPolygon from_ccw(std::vector<Point2> vertices);
  static ConvexPolygon degenerate(std::vector<Point2> vertices);

  const std::vector<Point2>& vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  bool is_degenerate() const { return degenerate_; }
  bool empty() const { return vertices_.empty(); }

  /// Point membership, boundary included up to `tol` (absolute distance).
  bool contains(Point2 p, double tol = 0.0) const;

 private:
  std::vector<Point2> vertices_;
  bool degenerate_ = true;
};

struct LiftedPoint {
  Point2 base;
  double height = 0.0;
};

/// Lower-hull triangle; the plane through its lifted vertices is
/// z = offset + gradient . x.
struct Facet {
  std::array<int, 3> vertex_ids{};
  Point2 gradient;
  double offset = 0.0;

  double value_at(Point2 x) const { return offset + dot(gradient, x); }
};

/// Extreme points of a planar set in counter-clockwise order, starting from
/// the lexicographically smallest point. Throws DegenerateInput when the set
/// does not span the plane.
ConvexPolygon convex_hull_2d(std::span<const Point2> points);

/// Like convex_hull_2d but returns a flagged degenerate polygon (point or
/// segment endpoints) instead of throwing.
ConvexPolygon convex_hull_or_degenerate(std::span<const Point2> points);

/// Full result of the lower-hull construction.
struct LowerHull {
  std::vector<Facet> facets;
  /// on_hull[i] is true when lifted point i is a vertex of the lower hull.
  std::vector<bool> on_hull;
  /// Tolerance used for height comparisons (kEpsHull times the scale).
  double height_tol = 0.0;
};

/// Triangulated downward-facing boundary of the convex hull of lifted points.
/// Points are inserted in index order, so coplanar configurations are
/// triangulated deterministically. Throws DegenerateInput when the bases are
/// collinear or fewer than three are distinct.
LowerHull compute_lower_hull(std::span<const LiftedPoint> points);

std::vector<Facet> lower_hull_lifted(std::span<const LiftedPoint> points);

/// Convex hull of the gradients of the facets incident to one hull vertex,
/// i.e. the subdifferential at that vertex. Degenerate when the vertex is not
/// strictly extreme.
ConvexPolygon normal_cell(std::span<const Facet> incident_facets);

/// Shoelace area; zero for degenerate polygons.
double polygon_area(const ConvexPolygon& poly);

/// Intersection of a convex polygon with the half-plane {p : n . p <= rhs}.
ConvexPolygon clip_halfplane(const ConvexPolygon& poly, Point2 n, double rhs);

/// Plane z = offset + gradient . x through three lifted points.
Facet plane_through(std::array<int, 3> ids, const LiftedPoint& a, const LiftedPoint& b,
                    const LiftedPoint& c);

}  // namespace masolve
