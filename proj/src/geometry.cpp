#include "masolve/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "masolve/errors.hpp"

namespace masolve {

ConvexPolygon ConvexPolygon::from_ccw(std::vector<Point2> vertices) {
  ConvexPolygon poly;
  poly.degenerate_ = vertices.size() < 3;
  poly.vertices_ = std::move(vertices);
  return poly;
}

ConvexPolygon ConvexPolygon::degenerate(std::vector<Point2> vertices) {
  ConvexPolygon poly;
  poly.vertices_ = std::move(vertices);
  poly.degenerate_ = true;
  return poly;
}

namespace {

double segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 == 0.0) return norm(p - a);
  const double s = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return norm(p - (a + s * ab));
}

}  // namespace

bool ConvexPolygon::contains(Point2 p, double tol) const {
  if (vertices_.empty()) return false;
  if (vertices_.size() == 1) return norm(p - vertices_[0]) <= tol;
  if (vertices_.size() == 2) return segment_distance(p, vertices_[0], vertices_[1]) <= tol;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = vertices_[i];
    const Point2 b = vertices_[(i + 1) % n];
    const double len = norm(b - a);
    if (orient(a, b, p) < -tol * len) return false;
  }
  return true;
}

ConvexPolygon convex_hull_or_degenerate(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  std::sort(pts.begin(), pts.end(), lex_less);
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.empty()) return {};
  if (pts.size() == 1) return ConvexPolygon::degenerate(pts);

  double scale = 0.0;
  for (const auto& p : pts) scale = std::max(scale, norm(p - pts.front()));
  const double tol = kEpsGeom * scale;

  // Merge points closer than tol; rounding in computed gradients produces
  // near-duplicates that would otherwise act as zero-length hull edges.
  std::vector<Point2> kept;
  kept.reserve(pts.size());
  for (const auto& p : pts) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend() && p.x - it->x <= tol; ++it) {
      if (norm(p - *it) <= tol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(p);
  }
  pts = std::move(kept);
  const Point2 lo = pts.front();
  const Point2 hi = pts.back();
  if (pts.size() < 3) return ConvexPolygon::degenerate({lo, hi});

  // Andrew's monotone chain; b is dropped when it lies within tol of the
  // line a -> p or to its right.
  auto drop = [&](Point2 a, Point2 b, Point2 p) { return orient(a, b, p) <= tol * norm(p - a); };
  std::vector<Point2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && drop(hull[k - 2], hull[k - 1], p)) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && drop(hull[k - 2], hull[k - 1], pts[i])) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return ConvexPolygon::degenerate({lo, hi});
  return ConvexPolygon::from_ccw(std::move(hull));
}

ConvexPolygon convex_hull_2d(std::span<const Point2> points) {
  ConvexPolygon hull = convex_hull_or_degenerate(points);
  if (hull.is_degenerate()) {
    throw DegenerateInput("convex_hull_2d: fewer than three non-collinear points");
  }
  return hull;
}

double polygon_area(const ConvexPolygon& poly) {
  if (poly.is_degenerate()) return 0.0;
  const auto& v = poly.vertices();
  double twice = 0.0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) twice += cross(v[i], v[(i + 1) % n]);
  return std::max(0.5 * twice, 0.0);
}

ConvexPolygon clip_halfplane(const ConvexPolygon& poly, Point2 n, double rhs) {
  const auto& v = poly.vertices();
  if (v.empty()) return poly;
  std::vector<double> s(v.size());
  bool any_out = false;
  bool any_in = false;
  for (std::size_t i = 0; i < v.size(); ++i) {
    s[i] = dot(n, v[i]) - rhs;
    (s[i] > 0.0 ? any_out : any_in) = true;
  }
  if (!any_out) return poly;
  if (!any_in) return {};

  std::vector<Point2> out;
  out.reserve(v.size() + 1);
  const std::size_t m = v.size();
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = (i + 1) % m;
    if (s[i] <= 0.0) out.push_back(v[i]);
    if (m > 1 && ((s[i] <= 0.0) != (s[j] <= 0.0))) {
      const double t = s[i] / (s[i] - s[j]);
      out.push_back(v[i] + t * (v[j] - v[i]));
    }
    if (m == 2) break;
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  while (out.size() > 1 && out.front() == out.back()) out.pop_back();
  if (out.size() < 3 || poly.is_degenerate()) return ConvexPolygon::degenerate(std::move(out));
  return ConvexPolygon::from_ccw(std::move(out));
}

Facet plane_through(std::array<int, 3> ids, const LiftedPoint& a, const LiftedPoint& b,
                    const LiftedPoint& c) {
  const Point2 e1 = b.base - a.base;
  const Point2 e2 = c.base - a.base;
  const double dz1 = b.height - a.height;
  const double dz2 = c.height - a.height;
  const double det = cross(e1, e2);
  Facet f;
  f.vertex_ids = ids;
  f.gradient = {(dz1 * e2.y - dz2 * e1.y) / det, (e1.x * dz2 - e2.x * dz1) / det};
  // Average the offset over the three vertices to spread rounding evenly.
  f.offset = ((a.height - dot(f.gradient, a.base)) + (b.height - dot(f.gradient, b.base)) +
              (c.height - dot(f.gradient, c.base))) /
             3.0;
  return f;
}

ConvexPolygon normal_cell(std::span<const Facet> incident_facets) {
  std::vector<Point2> gradients;
  gradients.reserve(incident_facets.size());
  for (const auto& f : incident_facets) gradients.push_back(f.gradient);
  return convex_hull_or_degenerate(gradients);
}

// ---------------------------------------------------------------------------
// Incremental lower hull.
//
// The lower hull is maintained as a triangulation of the projected points
// closed by "ghost" triangles (u, w, inf) along the outer boundary, which
// stand for the vertical walls of a hull whose apex sits at z = +inf. A new
// point removes every triangle it sees from below (its conflict region) and
// is connected to the horizon of that region; points seen by nothing lie on
// or above the current lower hull and are skipped.
// ---------------------------------------------------------------------------
namespace {

constexpr int kInf = -1;

struct Tri {
  std::array<int, 3> v;   // ccw; kInf can only sit at v[2]
  std::array<int, 3> nb;  // nb[k] is the triangle across the edge opposite v[k]
  bool alive = true;

  bool ghost() const { return v[2] == kInf; }
};

class LowerHullBuilder {
 public:
  explicit LowerHullBuilder(std::span<const LiftedPoint> pts) : pts_(pts) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin, zmin = xmin, zmax = -xmin;
    for (const auto& p : pts_) {
      if (!std::isfinite(p.base.x) || !std::isfinite(p.base.y) || !std::isfinite(p.height)) {
        throw DegenerateInput("lower hull: non-finite coordinate");
      }
      xmin = std::min(xmin, p.base.x);
      xmax = std::max(xmax, p.base.x);
      ymin = std::min(ymin, p.base.y);
      ymax = std::max(ymax, p.base.y);
      zmin = std::min(zmin, p.height);
      zmax = std::max(zmax, p.height);
    }
    xy_scale_ = std::hypot(xmax - xmin, ymax - ymin);
    const double z_scale = std::max({std::abs(zmin), std::abs(zmax), zmax - zmin});
    z_tol_ = kEpsHull * std::max({xy_scale_, z_scale, std::numeric_limits<double>::min()});
    dist_tol_ = kEpsGeom * xy_scale_;
  }

  LowerHull run() {
    const std::vector<int> order = distinct_lowest();
    if (order.size() < 3) throw DegenerateInput("lower hull: fewer than three distinct bases");
    init(order);
    for (int id : order) {
      if (id == seed_[0] || id == seed_[1] || id == seed_[2]) continue;
      insert(id);
    }
    LowerHull out;
    out.height_tol = z_tol_;
    out.on_hull.assign(pts_.size(), false);
    for (const auto& t : tris_) {
      if (!t.alive || t.ghost()) continue;
      out.facets.push_back(plane_through(t.v, pts_[t.v[0]], pts_[t.v[1]], pts_[t.v[2]]));
      for (int v : t.v) out.on_hull[v] = true;
    }
    return out;
  }

 private:
  Point2 base(int i) const { return pts_[i].base; }
  double z(int i) const { return pts_[i].height; }

  // Indices in input order, keeping only the lowest point per distinct base.
  std::vector<int> distinct_lowest() const {
    std::vector<int> idx(pts_.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      if (base(a) != base(b)) return lex_less(base(a), base(b));
      if (z(a) != z(b)) return z(a) < z(b);
      return a < b;
    });
    std::vector<int> keep;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k == 0 || base(idx[k]) != base(idx[k - 1])) keep.push_back(idx[k]);
    }
    std::sort(keep.begin(), keep.end());
    return keep;
  }

  // Signed distance of p from the directed line a -> b (positive on the left).
  double side(Point2 a, Point2 b, Point2 p) const {
    const double len = norm(b - a);
    return orient(a, b, p) / len;
  }

  void init(const std::vector<int>& order) {
    int lo = order.front(), hi = order.front();
    for (int i : order) {
      if (lex_less(base(i), base(lo))) lo = i;
      if (lex_less(base(hi), base(i))) hi = i;
    }
    int far = -1;
    double best = 0.0;
    for (int i : order) {
      const double d = std::abs(side(base(lo), base(hi), base(i)));
      if (d > best) {
        best = d;
        far = i;
      }
    }
    if (far < 0 || best <= dist_tol_) throw DegenerateInput("lower hull: bases are collinear");
    int a = lo, b = hi, c = far;
    if (orient(base(a), base(b), base(c)) < 0.0) std::swap(a, b);
    seed_ = {a, b, c};
    // 0: finite (a,b,c); ghosts across bc, ca, ab.
    tris_.push_back({{a, b, c}, {1, 2, 3}});
    tris_.push_back({{c, b, kInf}, {3, 2, 0}});
    tris_.push_back({{a, c, kInf}, {1, 3, 0}});
    tris_.push_back({{b, a, kInf}, {2, 1, 0}});
  }

  bool contains(const Tri& t, Point2 p) const {
    for (int k = 0; k < 3; ++k) {
      if (side(base(t.v[k]), base(t.v[(k + 1) % 3]), p) < -dist_tol_) return false;
    }
    return true;
  }

  bool conflict(const Tri& t, int pid) const {
    const Point2 p = base(pid);
    const double zp = z(pid);
    if (t.ghost()) {
      const Point2 u = base(t.v[0]);
      const Point2 w = base(t.v[1]);
      const double d = side(u, w, p);
      if (d > dist_tol_) return true;
      if (d < -dist_tol_) return false;
      const Point2 uw = w - u;
      const double s = dot(p - u, uw) / dot(uw, uw);
      if (s <= 0.0 || s >= 1.0) return false;
      return zp < (1.0 - s) * z(t.v[0]) + s * z(t.v[1]) - z_tol_;
    }
    const Point2 a = base(t.v[0]), b = base(t.v[1]), c = base(t.v[2]);
    const double area = orient(a, b, c);
    const double la = orient(p, b, c) / area;
    const double lb = orient(a, p, c) / area;
    const double lc = 1.0 - la - lb;
    return zp < la * z(t.v[0]) + lb * z(t.v[1]) + lc * z(t.v[2]) - z_tol_;
  }

  void insert(int pid) {
    const Point2 p = base(pid);
    int seed = -1;
    bool located = false;
    for (std::size_t t = 0; t < tris_.size(); ++t) {
      const Tri& tri = tris_[t];
      if (!tri.alive || tri.ghost() || !contains(tri, p)) continue;
      located = true;
      if (conflict(tri, pid)) seed = static_cast<int>(t);
      break;
    }
    if (!located) {
      for (std::size_t t = 0; t < tris_.size(); ++t) {
        if (tris_[t].alive && tris_[t].ghost() && conflict(tris_[t], pid)) {
          seed = static_cast<int>(t);
          break;
        }
      }
    }
    if (seed < 0) return;

    std::vector<char> in_cavity(tris_.size(), 0);
    std::vector<int> cavity{seed};
    in_cavity[seed] = 1;
    for (std::size_t q = 0; q < cavity.size(); ++q) {
      for (int n : tris_[cavity[q]].nb) {
        if (!in_cavity[n] && conflict(tris_[n], pid)) {
          in_cavity[n] = 1;
          cavity.push_back(n);
        }
      }
    }
    // Every new finite triangle must be strictly ccw; absorb neighbours
    // across horizon edges that p does not see strictly from inside.
    for (bool grown = true; grown;) {
      grown = false;
      for (std::size_t q = 0; q < cavity.size(); ++q) {
        const Tri& t = tris_[cavity[q]];
        for (int k = 0; k < 3; ++k) {
          const int n = t.nb[k];
          if (in_cavity[n]) continue;
          const int u = t.v[(k + 1) % 3], w = t.v[(k + 2) % 3];
          if (u == kInf || w == kInf) continue;
          if (side(base(u), base(w), p) <= dist_tol_) {
            in_cavity[n] = 1;
            cavity.push_back(n);
            grown = true;
          }
        }
      }
    }

    struct Edge {
      int u, w, outside;
    };
    std::vector<Edge> horizon;
    for (int c : cavity) {
      const Tri& t = tris_[c];
      for (int k = 0; k < 3; ++k) {
        if (!in_cavity[t.nb[k]]) horizon.push_back({t.v[(k + 1) % 3], t.v[(k + 2) % 3], t.nb[k]});
      }
    }

    std::unordered_map<int, int> starting_at, ending_at;
    const int first_new = static_cast<int>(tris_.size());
    for (std::size_t e = 0; e < horizon.size(); ++e) {
      const int id = first_new + static_cast<int>(e);
      if (!starting_at.emplace(horizon[e].u, id).second ||
          !ending_at.emplace(horizon[e].w, id).second) {
        throw std::logic_error("lower hull: conflict region is not a topological disk");
      }
    }
    for (int c : cavity) tris_[c].alive = false;

    for (const Edge& e : horizon) {
      const int id = static_cast<int>(tris_.size());
      Tri t;
      // Order (u, w, p): across (w,p) is the new triangle starting at w,
      // across (p,u) the one ending at u, across (u,w) the old outside one.
      t.v = {e.u, e.w, pid};
      t.nb = {starting_at.at(e.w), ending_at.at(e.u), e.outside};
      if (e.u == kInf) {
        t.v = {e.w, pid, e.u};
        t.nb = {t.nb[1], t.nb[2], t.nb[0]};
      } else if (e.w == kInf) {
        t.v = {pid, e.u, e.w};
        t.nb = {t.nb[2], t.nb[0], t.nb[1]};
      }
      Tri& out = tris_[e.outside];
      for (int k = 0; k < 3; ++k) {
        if (out.v[(k + 1) % 3] == e.w && out.v[(k + 2) % 3] == e.u) out.nb[k] = id;
      }
      tris_.push_back(t);
    }
  }

  std::span<const LiftedPoint> pts_;
  std::vector<Tri> tris_;
  std::array<int, 3> seed_{};
  double xy_scale_ = 0.0;
  double z_tol_ = 0.0;
  double dist_tol_ = 0.0;
};

}  // namespace

LowerHull compute_lower_hull(std::span<const LiftedPoint> points) {
  if (points.size() < 3) throw DegenerateInput("lower hull: fewer than three points");
  return LowerHullBuilder(points).run();
}

std::vector<Facet> lower_hull_lifted(std::span<const LiftedPoint> points) {
  return compute_lower_hull(points).facets;
}

}  // namespace masolve
