#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "masolve/domain.hpp"
#include "masolve/geometry.hpp"

namespace masolve {

/// Triangulation of an inscribed polygon. Vertex ids are global: interior
/// vertices come first (ids 0 .. k-1), boundary vertices follow
/// (ids k .. k+m-1) in counter-clockwise order along the boundary.
class Mesh {
 public:
  Mesh() = default;
  /// `boundary_params` holds the curve parameter of each boundary vertex
  /// (may be empty for hand-built meshes that never query boundary data).
  Mesh(std::vector<Point2> interior, std::vector<Point2> boundary,
       std::vector<std::array<int, 3>> triangles, std::vector<double> boundary_params = {});

  int num_interior() const { return static_cast<int>(interior_.size()); }
  int num_boundary() const { return static_cast<int>(boundary_.size()); }
  int num_vertices() const { return num_interior() + num_boundary(); }
  bool is_boundary(int v) const { return v >= num_interior(); }
  int boundary_id(int j) const { return num_interior() + j; }

  Point2 vertex(int v) const { return is_boundary(v) ? boundary_[v - num_interior()] : interior_[v]; }
  const std::vector<Point2>& interior_vertices() const { return interior_; }
  const std::vector<Point2>& boundary_vertices() const { return boundary_; }
  const std::vector<double>& boundary_params() const { return boundary_params_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  /// Triangles incident to vertex v.
  const std::vector<int>& star(int v) const { return star_[v]; }
  /// Maximum triangle diameter.
  double h() const { return h_; }
  /// Omega_h, the convex hull of the boundary vertices.
  const ConvexPolygon& outline() const { return outline_; }

  /// Hat function of vertex v (1 at v, 0 at every other vertex, linear on
  /// triangles); zero outside the star of v.
  double hat(int v, Point2 x) const;
  /// Index of a triangle containing x (boundary inclusive), or -1.
  int locate(Point2 x) const;
  /// Barycentric coordinates of x in triangle t.
  std::array<double, 3> barycentric(int t, Point2 x) const;

 private:
  std::vector<Point2> interior_;
  std::vector<Point2> boundary_;
  std::vector<double> boundary_params_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::vector<int>> star_;
  ConvexPolygon outline_;
  double h_ = 0.0;
};

/// Parameters of the structural assumptions behind convergence of the method:
/// boundary parabolic-support order and constant, slope-density decay, and
/// source decay near the boundary.
struct AssumptionProfile {
  double tau = 0.0;     // parabolic-support order of the boundary
  double eta = 0.5;     // parabolic-support constant
  double k = 0.0;       // slope-density decay exponent: R(p) >= C0 |p|^{-2k}
  double C0 = 1.0;
  double r0 = 1.0;      // ... for |p| >= r0
  double lambda = 0.0;  // source decay exponent near the boundary
  double C1p = 1.0;     // source decay constant
  int d = 2;

  /// K = (d + tau + 1) / (tau + 2) + lambda / 2.
  double K() const;
  /// k <= K when 0 <= k < 1 or k >= d/2; k < K when 1 <= k < d/2.
  bool exponent_condition() const;
};

/// Samples n_boundary points uniformly in the curve parameter, fills the
/// inscribed polygon shrunk by spacing/2 with an axis-aligned grid anchored at
/// the domain centre, and Delaunay-triangulates everything.
Mesh build_mesh(const ConvexDomain& domain, int n_boundary, double interior_spacing);

/// Delaunay triangulation (lower hull of the paraboloid lift). Every input
/// point must end up a vertex; throws DegenerateInput otherwise.
std::vector<std::array<int, 3>> delaunay_triangulation(std::span<const Point2> points);

struct MeshReport {
  bool conforming = false;           // triangles meet in shared edges/vertices only
  bool convex_outline = false;       // Omega_h is convex
  bool boundary_on_curve = false;    // every boundary vertex lies on the curve
  bool interior_strictly_inside = false;
  bool inner_region_contained = false;  // closure of {dist > delta} inside Omega_h
  double max_boundary_facet_diameter = 0.0;
  double h = 0.0;
  std::vector<std::string> problems;

  bool valid() const { return conforming && convex_outline && boundary_on_curve && interior_strictly_inside; }
};

MeshReport check_mesh(const Mesh& mesh, const ConvexDomain& domain, double delta);

/// Longest edge of the outline polygon.
double max_boundary_facet_diameter(const Mesh& mesh);

struct BoundaryTrace {
  int vertex_id;
  double value;
};

/// g evaluated at every boundary vertex through its curve parameter.
std::vector<BoundaryTrace> boundary_trace(const Mesh& mesh, const ConvexDomain& domain);

}  // namespace masolve
