#include "masolve/measures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>

#include "masolve/errors.hpp"
#include "masolve/parallel.hpp"

namespace masolve {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------
// SlopeDensity

SlopeDensity SlopeDensity::constant(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw std::invalid_argument("slope density: constant must be positive");
  SlopeDensity r;
  r.kind_ = Kind::Constant;
  r.c_ = c;
  return r;
}

SlopeDensity SlopeDensity::gauss_curvature(double q) {
  if (!std::isfinite(q)) throw std::invalid_argument("slope density: exponent q must be finite");
  SlopeDensity r;
  r.kind_ = Kind::GaussCurvature;
  r.q_ = q;
  return r;
}

SlopeDensity SlopeDensity::power_tail(double C0, double k, double r0) {
  if (!(C0 > 0.0) || !(r0 > 0.0) || !(k >= 0.0) || !std::isfinite(C0 + k + r0)) {
    throw std::invalid_argument("slope density: power tail needs C0 > 0, k >= 0, r0 > 0");
  }
  SlopeDensity r;
  r.kind_ = Kind::PowerTail;
  r.C0_ = C0;
  r.k_ = k;
  r.r0_ = r0;
  return r;
}

SlopeDensity SlopeDensity::tabulated(std::vector<double> xs, std::vector<double> ys, std::vector<double> values) {
  if (xs.size() < 2 || ys.size() < 2 || values.size() != xs.size() * ys.size()) {
    throw std::invalid_argument("slope density: tabulated grid must be at least 2x2 and complete");
  }
  if (!std::is_sorted(xs.begin(), xs.end()) || !std::is_sorted(ys.begin(), ys.end()) ||
      std::adjacent_find(xs.begin(), xs.end()) != xs.end() || std::adjacent_find(ys.begin(), ys.end()) != ys.end()) {
    throw std::invalid_argument("slope density: tabulated axes must be strictly increasing");
  }
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("slope density: tabulated values must be positive");
  }
  SlopeDensity r;
  r.kind_ = Kind::Tabulated;
  r.xs_ = std::move(xs);
  r.ys_ = std::move(ys);
  r.values_ = std::move(values);
  return r;
}

SlopeDensity SlopeDensity::load_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("slope density: cannot open " + path);
  std::map<std::pair<double, double>, double> table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    double px, py, v;
    if (!(ss >> px >> py >> v)) {
      if (lineno == 1) continue;  // header
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected px,py,value");
    }
    table[{px, py}] = v;
  }
  std::vector<double> xs, ys;
  for (const auto& [key, v] : table) {
    xs.push_back(key.first);
    ys.push_back(key.second);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  std::vector<double> values;
  values.reserve(xs.size() * ys.size());
  for (double y : ys) {
    for (double x : xs) {
      auto it = table.find({x, y});
      if (it == table.end()) throw std::runtime_error(path + ": tabulated grid is incomplete");
      values.push_back(it->second);
    }
  }
  return tabulated(std::move(xs), std::move(ys), std::move(values));
}

double SlopeDensity::radial_value(double r) const {
  switch (kind_) {
    case Kind::Constant:
      return c_;
    case Kind::GaussCurvature:
      return std::pow(1.0 + r * r, -q_);
    case Kind::PowerTail:
      return C0_ * std::pow(std::max(r, r0_), -2.0 * k_);
    case Kind::Tabulated:
      return (*this)(Point2{r, 0.0});
  }
  return 0.0;
}

double SlopeDensity::operator()(Point2 p) const {
  if (kind_ != Kind::Tabulated) return radial_value(norm(p));
  const auto locate = [](const std::vector<double>& axis, double v, std::size_t& i, double& f) {
    v = std::clamp(v, axis.front(), axis.back());
    i = static_cast<std::size_t>(std::upper_bound(axis.begin(), axis.end(), v) - axis.begin());
    i = std::clamp<std::size_t>(i, 1, axis.size() - 1) - 1;
    f = (v - axis[i]) / (axis[i + 1] - axis[i]);
  };
  std::size_t i, j;
  double fx, fy;
  locate(xs_, p.x, i, fx);
  locate(ys_, p.y, j, fy);
  const std::size_t nx = xs_.size();
  const double v00 = values_[j * nx + i], v10 = values_[j * nx + i + 1];
  const double v01 = values_[(j + 1) * nx + i], v11 = values_[(j + 1) * nx + i + 1];
  return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11;
}

double SlopeDensity::total_mass() const {
  switch (kind_) {
    case Kind::Constant:
    case Kind::Tabulated:
      return kInf;
    case Kind::GaussCurvature:
      return q_ > 1.0 ? kPi / (q_ - 1.0) : kInf;
    case Kind::PowerTail:
      return k_ > 1.0 ? kPi * C0_ * std::pow(r0_, 2.0 - 2.0 * k_) * k_ / (k_ - 1.0) : kInf;
  }
  return kInf;
}

DecayProfile SlopeDensity::decay() const {
  switch (kind_) {
    case Kind::Constant:
      return {c_, 0.0, 1.0};
    case Kind::GaussCurvature:
      // (1 + r^2)^-q >= 2^-q r^-2q for r >= 1; bounded below by 1 when q <= 0.
      if (q_ <= 0.0) return {1.0, 0.0, 1.0};
      return {std::pow(2.0, -q_), q_, 1.0};
    case Kind::PowerTail:
      return {C0_, k_, r0_};
    case Kind::Tabulated:
      return {*std::min_element(values_.begin(), values_.end()), 0.0, 1.0};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Integrals over slope space

Integral integrate_R_over_polygon(const SlopeDensity& R, const ConvexPolygon& cell, const QuadratureConfig& q) {
  Integral out;
  if (cell.is_degenerate() || cell.size() < 3) return out;
  if (R.kind() == SlopeDensity::Kind::Constant) {
    out.value = R.c() * polygon_area(cell);
    return out;
  }
  // Canonical vertex list: the same cell computed by different routes
  // differs only by rounding, and must produce the same fan. The start vertex
  // is extreme in a generic direction so that axis-aligned edges do not make
  // the choice depend on rounding.
  const ConvexPolygon canon = convex_hull_or_degenerate(cell.vertices());
  if (canon.is_degenerate()) return out;
  std::vector<Point2> v = canon.vertices();
  const Point2 dir{0.9924450321351935, 0.12268638888467117};
  std::size_t start = 0;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (dot(dir, v[k]) < dot(dir, v[start])) start = k;
  }
  std::rotate(v.begin(), v.begin() + start, v.end());
  std::vector<std::array<Point2, 3>> fan;
  fan.reserve(v.size() - 2);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) fan.push_back({v[0], v[i], v[i + 1]});
  const auto res = integrate_triangles<1>(fan, [&](Point2 p) { return std::array<double, 1>{R(p)}; }, q);
  out.value = std::max(0.0, res.value[0]);
  out.error = res.error;
  out.converged = res.converged;
  return out;
}

namespace {

// Integral of f over [0, rho] on pieces [0, 1], [1, 2], [2, 4], ... so that
// the adaptive rule always sees a well-scaled interval. Extra break points
// (kinks of the integrand) are inserted as given.
template <class F>
double radial_integral(F&& f, double rho, std::vector<double> breaks = {}) {
  std::vector<double> pts{0.0};
  for (double b = 1.0; b < rho; b *= 2.0) pts.push_back(b);
  for (double b : breaks) {
    if (b > 0.0 && b < rho) pts.push_back(b);
  }
  pts.push_back(rho);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) sum += integrate_interval(f, pts[i], pts[i + 1], 1e-14);
  return sum;
}

}  // namespace

double g_R(const SlopeDensity& R, double rho) {
  if (!(rho >= 0.0)) throw std::invalid_argument("g_R: radius must be non-negative");
  if (rho == 0.0) return 0.0;
  if (R.radial()) {
    std::vector<double> breaks;
    if (R.kind() == SlopeDensity::Kind::PowerTail) breaks.push_back(R.decay().r0);
    return radial_integral([&](double r) { return 2.0 * kPi * r * R.radial_value(r); }, rho, breaks);
  }
  // Polar integration for non-radial densities.
  auto ring = [&](double theta) {
    const Point2 e{std::cos(theta), std::sin(theta)};
    return radial_integral([&](double r) { return r * R(r * e); }, rho);
  };
  double sum = 0.0;
  constexpr int kPieces = 8;
  for (int s = 0; s < kPieces; ++s) {
    sum += integrate_interval(ring, 2.0 * kPi * s / kPieces, 2.0 * kPi * (s + 1) / kPieces, 1e-12);
  }
  return sum;
}

double g_R_inverse(const SlopeDensity& R, double m) {
  if (!(m >= 0.0)) throw std::invalid_argument("g_R_inverse: mass must be non-negative");
  if (m == 0.0) return 0.0;
  const double total = R.total_mass();
  if (m >= total) throw MassExceedsTotal("g_R_inverse: mass is not below the total slope-density mass");
  double lo = 0.0, hi = 1.0;
  while (g_R(R, hi) < m) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e150) throw MassExceedsTotal("g_R_inverse: mass not reached");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (g_R(R, mid) < m) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Source measure

SourceDensity SourceDensity::constant(double v) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("source density: constant must be >= 0");
  SourceDensity d;
  d.kind = v == 0.0 ? Kind::Zero : Kind::Constant;
  d.value = v;
  return d;
}

SourceDensity SourceDensity::radial_polynomial(std::vector<double> coefficients, Point2 center) {
  for (double c : coefficients) {
    if (!std::isfinite(c)) throw std::invalid_argument("source density: coefficients must be finite");
  }
  SourceDensity d;
  d.kind = Kind::RadialPolynomial;
  d.coefficients = std::move(coefficients);
  d.center = center;
  return d;
}

double SourceDensity::operator()(Point2 x) const {
  switch (kind) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return value;
    case Kind::RadialPolynomial: {
      const double r = norm(x - center);
      double acc = 0.0;
      for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * r + *it;
      return acc;
    }
  }
  return 0.0;
}

bool SourceDensity::is_zero() const {
  if (kind == Kind::Zero) return true;
  if (kind == Kind::Constant) return value == 0.0;
  return std::all_of(coefficients.begin(), coefficients.end(), [](double c) { return c == 0.0; });
}

SourceMeasure::SourceMeasure(SourceDensity density, std::vector<Atom> atoms)
    : density_(std::move(density)), atoms_(std::move(atoms)) {
  for (const auto& a : atoms_) {
    if (!(a.mass > 0.0) || !std::isfinite(a.mass) || !std::isfinite(a.x.x) || !std::isfinite(a.x.y)) {
      throw std::invalid_argument("source measure: atoms need finite positions and positive masses");
    }
  }
}

bool SourceMeasure::in_support(Point2 x) const {
  if (!domain_) return true;
  return domain_->contains(x) && domain_->dist_to_boundary(x) > delta_;
}

double SourceMeasure::density_at(Point2 x) const {
  if (density_.is_zero()) return 0.0;
  return in_support(x) ? density_(x) : 0.0;
}

SourceMeasure truncate_measure(const SourceMeasure& mu, const ConvexDomain& domain, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("truncate_measure: delta must be positive");
  SourceMeasure out = mu;
  out.domain_ = domain;
  out.delta_ = std::max(delta, mu.delta_);
  std::vector<Atom> kept;
  for (const auto& a : mu.atoms_) {
    if (out.in_support(a.x)) kept.push_back(a);
  }
  out.atoms_ = std::move(kept);
  return out;
}

double source_mass(const SourceMeasure& mu, const ConvexDomain& domain, double rel_tol) {
  double total = 0.0;
  if (!mu.density().is_zero()) {
    const Point2 c = domain.center();
    auto ray = [&](double theta) {
      const Point2 e{std::cos(theta), std::sin(theta)};
      const double rmax = domain.radius_at(theta);
      return integrate_interval([&](double r) { return r * mu.density()(c + r * e); }, 0.0, rmax, rel_tol);
    };
    constexpr int kPieces = 16;
    for (int s = 0; s < kPieces; ++s) {
      total += integrate_interval(ray, 2.0 * kPi * s / kPieces, 2.0 * kPi * (s + 1) / kPieces, rel_tol);
    }
  }
  for (const auto& a : mu.atoms()) {
    if (domain.contains(a.x)) total += a.mass;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Target masses

namespace {

using Tri = std::array<Point2, 3>;

// Fixed composite rule: the triangle split into 4^level congruent pieces,
// degree-5 rule on each. Positive weights keep it monotone in the integrand.
template <class F>
std::array<double, 3> composite(const Tri& t, int level, F&& f) {
  const TriangleRule& rule = triangle_rule(5);
  const int n = 1 << level;
  const double area = 0.5 * std::abs(orient(t[0], t[1], t[2])) / (double(n) * n);
  std::array<double, 3> acc{};
  auto at = [&](double a, double b) { return t[0] + (a / n) * (t[1] - t[0]) + (b / n) * (t[2] - t[0]); };
  auto sub = [&](Point2 p0, Point2 p1, Point2 p2) {
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const auto& l = rule.nodes[q];
      const Point2 x = l[0] * p0 + l[1] * p1 + l[2] * p2;
      const auto v = f(x);
      for (int k = 0; k < 3; ++k) acc[k] += rule.weights[q] * area * v[k];
    }
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; i + j < n; ++j) {
      sub(at(i, j), at(i + 1, j), at(i, j + 1));
      if (i + j + 1 < n) sub(at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
    }
  }
  return acc;
}

constexpr int kTruncationLevel = 4;

}  // namespace

std::vector<double> target_masses(const Mesh& mesh, const SourceMeasure& mu, const QuadratureConfig& q,
                                  bool* converged) {
  const int k = mesh.num_interior();
  std::vector<double> m(k, 0.0);
  bool ok = true;
  const auto& tris = mesh.triangles();
  if (!mu.density().is_zero()) {
    std::vector<std::array<double, 3>> per_tri(tris.size());
    std::vector<char> tri_ok(tris.size(), 1);
    const SourceDensity& f = mu.density();
    parallel_for(static_cast<int>(tris.size()), [&](int t) {
      const auto& ids = tris[t];
      if (ids[0] >= k && ids[1] >= k && ids[2] >= k) return;
      const Tri tri{mesh.vertex(ids[0]), mesh.vertex(ids[1]), mesh.vertex(ids[2])};
      const double area2 = orient(tri[0], tri[1], tri[2]);
      auto bary = [&](Point2 x) {
        const double l0 = orient(x, tri[1], tri[2]) / area2;
        const double l1 = orient(tri[0], x, tri[2]) / area2;
        return std::array<double, 3>{l0, l1, 1.0 - l0 - l1};
      };
      auto smooth = [&](Point2 x) {
        auto l = bary(x);
        const double v = f(x);
        return std::array<double, 3>{v * l[0], v * l[1], v * l[2]};
      };
      auto adaptive = [&] {
        const std::array<Tri, 1> one{tri};
        const auto res = integrate_triangles<3>(std::span<const Tri>(one), smooth, q);
        if (!res.converged) tri_ok[t] = 0;
        return res.value;
      };
      if (!mu.truncation_domain()) {
        per_tri[t] = adaptive();
        return;
      }
      const ConvexDomain& dom = *mu.truncation_domain();
      const double delta = mu.delta();
      std::array<double, 3> d;
      bool all_in = true;
      for (int v = 0; v < 3; ++v) {
        d[v] = dom.contains(tri[v]) ? dom.dist_to_boundary(tri[v]) : 0.0;
        all_in = all_in && mu.in_support(tri[v]);
      }
      const double diam = std::max({norm(tri[1] - tri[0]), norm(tri[2] - tri[1]), norm(tri[0] - tri[2])});
      if (all_in) {
        // The inner region is convex, so it contains the whole triangle.
        per_tri[t] = adaptive();
      } else if (*std::min_element(d.begin(), d.end()) + diam <= delta) {
        per_tri[t] = {0.0, 0.0, 0.0};
      } else {
        per_tri[t] = composite(tri, kTruncationLevel, [&](Point2 x) {
          if (!mu.in_support(x)) return std::array<double, 3>{0.0, 0.0, 0.0};
          return smooth(x);
        });
      }
    });
    for (std::size_t t = 0; t < tris.size(); ++t) {
      ok = ok && tri_ok[t];
      for (int v = 0; v < 3; ++v) {
        if (tris[t][v] < k) m[tris[t][v]] += per_tri[t][v];
      }
    }
  }
  for (const auto& a : mu.atoms()) {
    if (!mu.in_support(a.x)) continue;
    const int t = mesh.locate(a.x);
    if (t < 0) continue;
    const auto l = mesh.barycentric(t, a.x);
    for (int v = 0; v < 3; ++v) {
      const int id = mesh.triangles()[t][v];
      if (id < k) m[id] += a.mass * std::clamp(l[v], 0.0, 1.0);
    }
  }
  if (converged) *converged = ok;
  return m;
}

// ---------------------------------------------------------------------------
// Assumptions

namespace {

double boundary_order(const ConvexDomain& domain) {
  return domain.shape() == ConvexDomain::Shape::Superellipse ? std::max(0.0, domain.exponent() - 2.0) : 0.0;
}

// Smallest gap / |s|^(tau+2) over sampled boundary points a0 and nearby
// boundary points, where s is the tangential offset and gap the distance
// below the tangent line.
double parabolic_ratio(const ConvexDomain& domain, double tau) {
  const double rho0 = 0.25 * domain.diameter();
  double worst = kInf;
  constexpr int kCentres = 256;
  for (int j = 0; j < kCentres; ++j) {
    const double t0 = double(j) / kCentres;
    const Point2 a0 = domain.boundary(t0);
    const Point2 n = domain.outward_normal(t0);
    const Point2 tangent{-n.y, n.x};
    for (int e = 3; e <= 14; ++e) {
      for (double sign : {-1.0, 1.0}) {
        const Point2 x = domain.boundary(t0 + sign * std::ldexp(1.0, -e));
        const Point2 d = x - a0;
        if (norm(d) > rho0) continue;
        const double s = std::abs(dot(d, tangent));
        if (s < 1e-9 * domain.diameter()) continue;
        const double gap = -dot(d, n);
        worst = std::min(worst, gap / std::pow(s, tau + 2.0));
      }
    }
  }
  return worst;
}

double sampled_density_sup(const SourceMeasure& mu, const ConvexDomain& domain) {
  if (mu.density().is_zero()) return 0.0;
  const double half = 0.5 * domain.diameter();
  const Point2 c = domain.center();
  double sup = 0.0;
  constexpr int kGrid = 101;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const Point2 x = c + Point2{-half + 2 * half * i / (kGrid - 1), -half + 2 * half * j / (kGrid - 1)};
      if (domain.contains(x)) sup = std::max(sup, mu.density_at(x));
    }
  }
  for (int s = 0; s < 1024; ++s) sup = std::max(sup, mu.density_at(domain.boundary(s / 1024.0)));
  return sup;
}

}  // namespace

AssumptionProfile derive_profile(const ConvexDomain& domain, const SlopeDensity& R, const SourceMeasure& mu) {
  AssumptionProfile p;
  p.tau = boundary_order(domain);
  p.eta = 0.99 * parabolic_ratio(domain, p.tau);
  const DecayProfile dec = R.decay();
  p.k = dec.k;
  p.C0 = dec.C0;
  p.r0 = dec.r0;
  p.lambda = 0.0;
  const double sup = sampled_density_sup(mu, domain);
  p.C1p = sup > 0.0 ? sup * (1.0 + 1e-9) : 1.0;
  return p;
}

AssumptionReport validate_assumptions(const AssumptionProfile& profile, const SlopeDensity& R,
                                      const SourceMeasure& mu, const ConvexDomain& domain) {
  AssumptionReport r;
  char buf[256];

  // Solvability gap. Both sides carry quadrature error, so equality up to a
  // relative 1e-9 counts as a violation.
  r.source_mass = source_mass(mu, domain);
  r.slope_mass = R.total_mass();
  r.mass_gap_ok = std::isinf(r.slope_mass) || r.source_mass < r.slope_mass * (1.0 - 1e-9);
  if (!r.mass_gap_ok) {
    std::snprintf(buf, sizeof buf, "mass gap violated: source mass %.12e is not below slope-density mass %.12e",
                  r.source_mass, r.slope_mass);
    r.messages.emplace_back(buf);
  }

  r.K = profile.K();
  r.k = profile.k;
  r.exponent_ok = profile.exponent_condition();
  if (!r.exponent_ok) {
    std::snprintf(buf, sizeof buf, "exponent condition violated: k = %.6g, K = %.6g (d = %d)", profile.k, r.K,
                  profile.d);
    r.messages.emplace_back(buf);
  }

  // R(p) >= C0 |p|^-2k on sampled rays beyond r0.
  r.decay_ok = true;
  for (int i = 0; i < 64 && r.decay_ok; ++i) {
    const double rad = profile.r0 * std::pow(1e4, i / 63.0);
    for (int a = 0; a < 16; ++a) {
      const double th = 2.0 * kPi * a / 16;
      const double bound = profile.C0 * std::pow(rad, -2.0 * profile.k);
      if (R(Point2{rad * std::cos(th), rad * std::sin(th)}) < bound * (1.0 - 1e-12)) r.decay_ok = false;
    }
  }
  if (!r.decay_ok) r.messages.emplace_back("slope-density decay bound R(p) >= C0 |p|^-2k fails on samples");

  // Source decay near the boundary on small boxes stacked inward from
  // sampled boundary points.
  r.source_decay_ratio = 0.0;
  const double diam = domain.diameter();
  constexpr int kBoundary = 64;
  constexpr int kSub = 16;
  for (int j = 0; j < kBoundary; ++j) {
    const double t0 = double(j) / kBoundary;
    const Point2 a0 = domain.boundary(t0);
    const Point2 n = domain.outward_normal(t0);
    const Point2 tg{-n.y, n.x};
    for (double side : {0.02 * diam, 0.005 * diam}) {
      for (int layer = 0; layer < 3; ++layer) {
        const Point2 centre = a0 - ((layer + 0.5) * side) * n;
        double mass = 0.0, area = 0.0, sup_dist = 0.0;
        const double cell = side / kSub;
        for (int a = 0; a < kSub; ++a) {
          for (int b = 0; b < kSub; ++b) {
            const Point2 x = centre + ((a + 0.5) * cell - 0.5 * side) * tg + ((b + 0.5) * cell - 0.5 * side) * n;
            if (!domain.contains(x)) continue;
            area += cell * cell;
            mass += mu.density_at(x) * cell * cell;
            sup_dist = std::max(sup_dist, domain.dist_to_boundary(x));
          }
        }
        for (const auto& at : mu.atoms()) {
          const Point2 d = at.x - centre;
          if (std::abs(dot(d, tg)) <= 0.5 * side && std::abs(dot(d, n)) <= 0.5 * side && domain.contains(at.x) &&
              mu.in_support(at.x)) {
            mass += at.mass;
            sup_dist = std::max(sup_dist, domain.dist_to_boundary(at.x));
          }
        }
        if (area <= 0.0) continue;
        if (mass == 0.0) continue;
        const double rhs = profile.C1p * std::pow(sup_dist, profile.lambda) * area;
        r.source_decay_ratio = std::max(r.source_decay_ratio, rhs > 0.0 ? mass / rhs : kInf);
      }
    }
  }
  r.source_decay_ok = r.source_decay_ratio <= 1.0 + 1e-6;
  if (!r.source_decay_ok) {
    std::snprintf(buf, sizeof buf, "source decay bound exceeded near the boundary (worst ratio %.6g)",
                  r.source_decay_ratio);
    r.messages.emplace_back(buf);
  }

  r.parabolic_ratio = parabolic_ratio(domain, profile.tau);
  r.parabolic_ok = r.parabolic_ratio >= profile.eta * (1.0 - 1e-9);
  if (!r.parabolic_ok) {
    std::snprintf(buf, sizeof buf, "parabolic support of order %.6g with constant %.6g not observed (worst %.6g)",
                  profile.tau, profile.eta, r.parabolic_ratio);
    r.messages.emplace_back(buf);
  }
  return r;
}

}  // namespace masolve
