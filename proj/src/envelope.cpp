#include "masolve/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "masolve/errors.hpp"

namespace masolve {

std::vector<double> boundary_heights(const Mesh& mesh, const ConvexDomain& domain) {
  std::vector<double> out;
  out.reserve(mesh.num_boundary());
  for (const auto& tr : boundary_trace(mesh, domain)) out.push_back(tr.value);
  return out;
}

ConvexEnvelope::ConvexEnvelope(const Mesh& mesh, const HeightField& heights)
    : mesh_(&mesh), heights_(heights) {
  if (static_cast<int>(heights.interior.size()) != mesh.num_interior() ||
      static_cast<int>(heights.boundary.size()) != mesh.num_boundary()) {
    throw std::invalid_argument("build_envelope: height field does not match the mesh");
  }
  const int n = mesh.num_vertices();
  std::vector<LiftedPoint> lifted(n);
  for (int v = 0; v < n; ++v) lifted[v] = {mesh.vertex(v), heights.at(v)};
  LowerHull hull = compute_lower_hull(lifted);
  facets_ = std::move(hull.facets);
  height_tol_ = hull.height_tol;
  hull_vertex_ = std::move(hull.on_hull);

  incident_.assign(n, {});
  for (std::size_t f = 0; f < facets_.size(); ++f) {
    for (int v : facets_[f].vertex_ids) incident_[v].push_back(static_cast<int>(f));
  }
  vertex_value_.resize(n);
  active_.resize(n);
  for (int v = 0; v < n; ++v) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : facets_) best = std::max(best, f.value_at(mesh.vertex(v)));
    vertex_value_[v] = hull_vertex_[v] ? heights.at(v) : std::min(best, heights.at(v));
    active_[v] = hull_vertex_[v] || best >= heights.at(v) - height_tol_;
  }
}

ConvexEnvelope build_envelope(const Mesh& mesh, const HeightField& heights) {
  return ConvexEnvelope(mesh, heights);
}

double evaluate(const ConvexEnvelope& env, Point2 x) {
  const Mesh& mesh = env.source_mesh();
  const double tol = kEpsGeom * std::max(1.0, mesh.h());
  if (!mesh.outline().contains(x, tol)) throw OutsideDomain("evaluate: point outside the mesh outline");
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& f : env.facets()) best = std::max(best, f.value_at(x));
  return best;
}

ConvexPolygon subdifferential_cell(const ConvexEnvelope& env, int i) {
  const Mesh& mesh = env.source_mesh();
  if (i < 0 || i >= mesh.num_interior()) throw std::out_of_range("subdifferential_cell: not an interior vertex");
  if (env.hull_vertex(i)) {
    std::vector<Facet> incident;
    for (int f : env.incident_facets(i)) incident.push_back(env.facets()[f]);
    return normal_cell(incident);
  }
  // Gradients of the facets whose projection contains A_i.
  const Point2 a = mesh.vertex(i);
  std::vector<Point2> grads;
  for (const auto& f : env.facets()) {
    const Point2 p0 = mesh.vertex(f.vertex_ids[0]);
    const Point2 p1 = mesh.vertex(f.vertex_ids[1]);
    const Point2 p2 = mesh.vertex(f.vertex_ids[2]);
    const double area = orient(p0, p1, p2);
    const double tol = 1e-12 * area;
    if (orient(a, p1, p2) >= -tol && orient(p0, a, p2) >= -tol && orient(p0, p1, a) >= -tol) {
      grads.push_back(f.gradient);
    }
  }
  ConvexPolygon cell = convex_hull_or_degenerate(grads);
  return ConvexPolygon::degenerate(cell.vertices());
}

bool membership_oracle(const ConvexEnvelope& env, int i, Point2 p) {
  const Mesh& mesh = env.source_mesh();
  const Point2 a = mesh.vertex(i);
  const double ua = env.vertex_value(i);
  const double tol = env.height_tol();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (env.vertex_value(v) < ua + dot(p, mesh.vertex(v) - a) - tol) return false;
  }
  return true;
}

}  // namespace masolve
