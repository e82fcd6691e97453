#pragma once

#include <vector>

#include "masolve/geometry.hpp"
#include "masolve/mesh.hpp"

namespace masolve {

/// Heights of the lifted mesh vertices: free interior heights and boundary
/// heights pinned to the boundary trace.
struct HeightField {
  std::vector<double> interior;
  std::vector<double> boundary;

  /// Height of a global vertex id (interior ids first, as in Mesh).
  double at(int v) const {
    const int k = static_cast<int>(interior.size());
    return v < k ? interior[v] : boundary[v - k];
  }
};

/// Boundary heights equal to g at each boundary vertex.
std::vector<double> boundary_heights(const Mesh& mesh, const ConvexDomain& domain);

/// Piecewise-linear convex function given by the lower convex hull of the
/// lifted mesh vertices. The mesh must outlive the envelope.
class ConvexEnvelope {
 public:
  ConvexEnvelope(const Mesh& mesh, const HeightField& heights);

  const Mesh& source_mesh() const { return *mesh_; }
  const HeightField& heights() const { return heights_; }
  const std::vector<Facet>& facets() const { return facets_; }
  /// True when the envelope touches the lifted vertex (value == height).
  bool active(int v) const { return active_[v]; }
  /// True when the lifted vertex is a vertex of the lower-hull triangulation.
  bool hull_vertex(int v) const { return hull_vertex_[v]; }
  /// Envelope value at mesh vertex v.
  double vertex_value(int v) const { return vertex_value_[v]; }
  const std::vector<int>& incident_facets(int v) const { return incident_[v]; }
  double height_tol() const { return height_tol_; }

 private:
  const Mesh* mesh_;
  HeightField heights_;
  std::vector<Facet> facets_;
  std::vector<bool> active_;
  std::vector<bool> hull_vertex_;
  std::vector<double> vertex_value_;
  std::vector<std::vector<int>> incident_;
  double height_tol_ = 0.0;
};

ConvexEnvelope build_envelope(const Mesh& mesh, const HeightField& heights);

/// Envelope value at x, computed as the maximum over all facet planes.
/// Throws OutsideDomain when x is outside the closed outline.
double evaluate(const ConvexEnvelope& env, Point2 x);

/// Subdifferential of the envelope at interior vertex i. For vertices that are
/// not hull vertices this is the degenerate cell spanned by the gradients of
/// the facets containing A_i (zero area).
ConvexPolygon subdifferential_cell(const ConvexEnvelope& env, int i);

/// Brute-force test of whether slope p supports the envelope at vertex i:
/// u(v) >= u(A_i) + p . (v - A_i) for every mesh vertex v, up to tolerance.
bool membership_oracle(const ConvexEnvelope& env, int i, Point2 p);

}  // namespace masolve
