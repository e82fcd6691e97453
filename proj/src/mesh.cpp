#include "masolve/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "masolve/errors.hpp"

namespace masolve {

Mesh::Mesh(std::vector<Point2> interior, std::vector<Point2> boundary,
           std::vector<std::array<int, 3>> triangles, std::vector<double> boundary_params)
    : interior_(std::move(interior)),
      boundary_(std::move(boundary)),
      boundary_params_(std::move(boundary_params)),
      triangles_(std::move(triangles)) {
  star_.assign(num_vertices(), {});
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int v : tri) star_.at(v).push_back(static_cast<int>(t));
    for (int k = 0; k < 3; ++k) {
      h_ = std::max(h_, norm(vertex(tri[k]) - vertex(tri[(k + 1) % 3])));
    }
  }
  outline_ = convex_hull_2d(boundary_);
}

std::array<double, 3> Mesh::barycentric(int t, Point2 x) const {
  const auto& tri = triangles_[t];
  const Point2 a = vertex(tri[0]), b = vertex(tri[1]), c = vertex(tri[2]);
  const double area = orient(a, b, c);
  const double la = orient(x, b, c) / area;
  const double lb = orient(a, x, c) / area;
  return {la, lb, 1.0 - la - lb};
}

namespace {
constexpr double kBaryTol = 1e-12;
}

int Mesh::locate(Point2 x) const {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto l = barycentric(static_cast<int>(t), x);
    if (l[0] >= -kBaryTol && l[1] >= -kBaryTol && l[2] >= -kBaryTol) return static_cast<int>(t);
  }
  return -1;
}

double Mesh::hat(int v, Point2 x) const {
  for (int t : star_[v]) {
    const auto l = barycentric(t, x);
    if (l[0] >= -kBaryTol && l[1] >= -kBaryTol && l[2] >= -kBaryTol) {
      const auto& tri = triangles_[t];
      for (int k = 0; k < 3; ++k) {
        if (tri[k] == v) return std::clamp(l[k], 0.0, 1.0);
      }
    }
  }
  return 0.0;
}

double AssumptionProfile::K() const { return (d + tau + 1.0) / (tau + 2.0) + lambda / 2.0; }

bool AssumptionProfile::exponent_condition() const {
  const double bound = K();
  const double half_d = d / 2.0;
  if (k < 0.0) return false;
  if (k < 1.0 || k >= half_d) return k <= bound;
  return k < bound;
}

std::vector<std::array<int, 3>> delaunay_triangulation(std::span<const Point2> points) {
  Point2 c;
  for (const auto& p : points) c = c + p;
  c = (1.0 / static_cast<double>(points.size())) * c;
  std::vector<LiftedPoint> lifted;
  lifted.reserve(points.size());
  for (const auto& p : points) {
    const Point2 d = p - c;
    lifted.push_back({p, dot(d, d)});
  }
  const LowerHull hull = compute_lower_hull(lifted);
  for (bool on : hull.on_hull) {
    if (!on) throw DegenerateInput("delaunay: duplicate or unplaced vertex");
  }
  std::vector<std::array<int, 3>> tris;
  tris.reserve(hull.facets.size());
  for (const auto& f : hull.facets) tris.push_back(f.vertex_ids);
  return tris;
}

Mesh build_mesh(const ConvexDomain& domain, int n_boundary, double interior_spacing) {
  if (n_boundary < 4) throw DegenerateDomain("build_mesh: n_boundary must be at least 4");
  if (!(interior_spacing > 0.0)) throw DegenerateDomain("build_mesh: spacing must be positive");

  std::vector<Point2> boundary;
  std::vector<double> params;
  for (int j = 0; j < n_boundary; ++j) {
    const double t = double(j) / n_boundary;
    params.push_back(t);
    boundary.push_back(domain.boundary(t));
  }
  ConvexPolygon outline;
  try {
    outline = convex_hull_2d(boundary);
  } catch (const DegenerateInput&) {
    throw DegenerateDomain("build_mesh: sampled boundary points are collinear");
  }
  if (outline.size() != boundary.size()) {
    throw DegenerateDomain("build_mesh: sampled boundary points are not in convex position");
  }

  // Grid points at distance >= spacing/2 from every outline edge.
  const auto& ov = outline.vertices();
  double xmin = ov[0].x, xmax = xmin, ymin = ov[0].y, ymax = ymin;
  for (const auto& p : ov) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  const double s = interior_spacing;
  const Point2 c = domain.center();
  const long i0 = static_cast<long>(std::floor((xmin - c.x) / s));
  const long i1 = static_cast<long>(std::ceil((xmax - c.x) / s));
  const long j0 = static_cast<long>(std::floor((ymin - c.y) / s));
  const long j1 = static_cast<long>(std::ceil((ymax - c.y) / s));
  std::vector<Point2> interior;
  for (long i = i0; i <= i1; ++i) {
    for (long j = j0; j <= j1; ++j) {
      const Point2 x = c + Point2{double(i) * s, double(j) * s};
      bool keep = true;
      for (std::size_t e = 0; e < ov.size() && keep; ++e) {
        const Point2 a = ov[e], b = ov[(e + 1) % ov.size()];
        keep = orient(a, b, x) / norm(b - a) >= 0.5 * s;
      }
      if (keep) interior.push_back(x);
    }
  }
  std::sort(interior.begin(), interior.end(), lex_less);

  std::vector<Point2> all = interior;
  all.insert(all.end(), boundary.begin(), boundary.end());
  auto tris = delaunay_triangulation(all);
  return Mesh(std::move(interior), std::move(boundary), std::move(tris), std::move(params));
}

double max_boundary_facet_diameter(const Mesh& mesh) {
  const auto& v = mesh.outline().vertices();
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) d = std::max(d, norm(v[(i + 1) % v.size()] - v[i]));
  return d;
}

MeshReport check_mesh(const Mesh& mesh, const ConvexDomain& domain, double delta) {
  MeshReport r;
  r.h = mesh.h();
  r.max_boundary_facet_diameter = max_boundary_facet_diameter(mesh);
  const double scale = domain.diameter();
  const int k = mesh.num_interior();
  const int m = mesh.num_boundary();

  // Conformity: positively oriented triangles, each directed edge used once,
  // unpaired edges are exactly the outline edges, areas add up.
  r.conforming = true;
  std::set<std::pair<int, int>> directed;
  double area_sum = 0.0;
  for (const auto& t : mesh.triangles()) {
    const double a2 = orient(mesh.vertex(t[0]), mesh.vertex(t[1]), mesh.vertex(t[2]));
    if (!(a2 > 0.0)) {
      r.conforming = false;
      r.problems.push_back("non-positive triangle orientation");
    }
    area_sum += 0.5 * a2;
    for (int e = 0; e < 3; ++e) {
      if (!directed.emplace(t[e], t[(e + 1) % 3]).second) {
        r.conforming = false;
        r.problems.push_back("directed edge used twice");
      }
    }
  }
  std::set<std::pair<int, int>> unpaired;
  for (const auto& [a, b] : directed) {
    if (!directed.count({b, a})) unpaired.emplace(a, b);
  }
  std::set<std::pair<int, int>> expected;
  for (int j = 0; j < m; ++j) expected.emplace(k + j, k + (j + 1) % m);
  if (unpaired != expected) {
    r.conforming = false;
    r.problems.push_back("triangulation boundary differs from the outline");
  }
  const double outline_area = polygon_area(mesh.outline());
  if (std::abs(area_sum - outline_area) > 1e-9 * std::max(1.0, outline_area)) {
    r.conforming = false;
    r.problems.push_back("triangle areas do not sum to the outline area");
  }

  r.convex_outline = m >= 3;
  for (int j = 0; j < m && r.convex_outline; ++j) {
    const Point2 a = mesh.boundary_vertices()[j];
    const Point2 b = mesh.boundary_vertices()[(j + 1) % m];
    const Point2 c = mesh.boundary_vertices()[(j + 2) % m];
    r.convex_outline = orient(a, b, c) > kEpsGeom * scale * scale;
  }
  if (!r.convex_outline) r.problems.push_back("outline is not strictly convex");

  r.boundary_on_curve = true;
  for (const auto& b : mesh.boundary_vertices()) {
    if (domain.dist_to_boundary(b) > 1e-9 * scale) r.boundary_on_curve = false;
  }
  if (!r.boundary_on_curve) r.problems.push_back("boundary vertex off the domain boundary");

  r.interior_strictly_inside = true;
  const auto& ov = mesh.outline().vertices();
  for (const auto& x : mesh.interior_vertices()) {
    for (std::size_t e = 0; e < ov.size(); ++e) {
      const Point2 a = ov[e], b = ov[(e + 1) % ov.size()];
      if (orient(a, b, x) / norm(b - a) <= kEpsGeom * scale) r.interior_strictly_inside = false;
    }
  }
  if (!r.interior_strictly_inside) r.problems.push_back("interior vertex not strictly inside");

  // closure of {dist > delta}: inner offset curve points plus a grid.
  r.inner_region_contained = true;
  constexpr int kCurve = 4096;
  for (int s = 0; s < kCurve && r.inner_region_contained; ++s) {
    const double t = double(s) / kCurve;
    const Point2 x = domain.boundary(t) - delta * domain.outward_normal(t);
    if (domain.contains(x) && domain.dist_to_boundary(x) >= delta * (1.0 - 1e-9)) {
      r.inner_region_contained = mesh.outline().contains(x, 0.0);
    }
  }
  constexpr int kGrid = 201;
  const Point2 c = domain.center();
  const double half = 0.5 * scale;
  for (int i = 0; i < kGrid && r.inner_region_contained; ++i) {
    for (int j = 0; j < kGrid && r.inner_region_contained; ++j) {
      const Point2 x = c + Point2{-half + scale * i / (kGrid - 1), -half + scale * j / (kGrid - 1)};
      if (domain.contains(x) && domain.dist_to_boundary(x) >= delta) {
        r.inner_region_contained = mesh.outline().contains(x, 0.0);
      }
    }
  }
  return r;
}

std::vector<BoundaryTrace> boundary_trace(const Mesh& mesh, const ConvexDomain& domain) {
  const auto& params = mesh.boundary_params();
  if (static_cast<int>(params.size()) != mesh.num_boundary()) {
    throw std::invalid_argument("boundary_trace: mesh has no boundary parameters");
  }
  std::vector<BoundaryTrace> out;
  out.reserve(params.size());
  for (int j = 0; j < mesh.num_boundary(); ++j) {
    out.push_back({mesh.boundary_id(j), domain.g(params[j])});
  }
  return out;
}

}  // namespace masolve
