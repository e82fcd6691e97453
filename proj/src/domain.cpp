#include "masolve/domain.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "masolve/errors.hpp"

namespace masolve {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double signed_pow(double v, double e) { return std::copysign(std::pow(std::abs(v), e), v); }
}  // namespace

BoundaryData BoundaryData::constant(double value) {
  BoundaryData g;
  g.kind = Kind::Constant;
  g.offset = value;
  return g;
}

BoundaryData BoundaryData::cosine(double offset, double amplitude, int mode) {
  BoundaryData g;
  g.kind = Kind::Cosine;
  g.offset = offset;
  g.amplitude = amplitude;
  g.mode = mode;
  return g;
}

BoundaryData BoundaryData::radial_quadratic(double scale, double offset, Point2 center) {
  BoundaryData g;
  g.kind = Kind::RadialQuadratic;
  g.offset = offset;
  g.amplitude = scale;
  g.center = center;
  return g;
}

double BoundaryData::operator()(double t, Point2 x) const {
  switch (kind) {
    case Kind::Constant:
      return offset;
    case Kind::Cosine:
      return offset + amplitude * std::cos(kTwoPi * mode * t);
    case Kind::RadialQuadratic: {
      const Point2 d = x - center;
      return offset + 0.5 * amplitude * dot(d, d);
    }
  }
  return offset;
}

ConvexDomain ConvexDomain::disk(Point2 center, double radius, BoundaryData g) {
  if (!(radius > 0.0)) throw DegenerateDomain("disk radius must be positive");
  ConvexDomain d;
  d.shape_ = Shape::Disk;
  d.center_ = center;
  d.a_ = d.b_ = radius;
  d.g_ = g;
  return d;
}

ConvexDomain ConvexDomain::ellipse(Point2 center, double a, double b, BoundaryData g) {
  if (!(a > 0.0 && b > 0.0)) throw DegenerateDomain("ellipse semi-axes must be positive");
  ConvexDomain d = disk(center, 1.0, g);
  d.shape_ = Shape::Ellipse;
  d.a_ = a;
  d.b_ = b;
  return d;
}

ConvexDomain ConvexDomain::superellipse(Point2 center, double a, double b, double exponent,
                                        BoundaryData g) {
  if (!(exponent >= 2.0)) throw DegenerateDomain("superellipse exponent must be >= 2");
  ConvexDomain d = ellipse(center, a, b, g);
  d.shape_ = Shape::Superellipse;
  d.p_ = exponent;
  return d;
}

ConvexDomain ConvexDomain::polygon(std::span<const Point2> vertices) {
  if (vertices.size() < 3) throw DegenerateDomain("polygon needs at least three vertices");
  std::vector<Point2> samples;
  constexpr int kPerEdge = 8;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Point2 a = vertices[i];
    const Point2 b = vertices[(i + 1) % vertices.size()];
    for (int k = 0; k < kPerEdge; ++k) samples.push_back(a + (double(k) / kPerEdge) * (b - a));
  }
  check_strictly_convex(samples);
  throw DegenerateDomain("polygonal domains are not strictly convex");
}

void check_strictly_convex(std::span<const Point2> s) {
  const std::size_t n = s.size();
  if (n < 3) throw DegenerateDomain("fewer than three boundary samples");
  double scale = 0.0;
  for (const auto& p : s) scale = std::max(scale, norm(p - s[0]));
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = s[i], b = s[(i + 1) % n], c = s[(i + 2) % n];
    if (orient(a, b, c) <= kEpsGeom * scale * scale) {
      throw DegenerateDomain("boundary is not strictly convex near sample " +
                             std::to_string((i + 1) % n));
    }
  }
}

Point2 ConvexDomain::boundary(double t) const {
  const double th = kTwoPi * t;
  const double c = std::cos(th), s = std::sin(th);
  if (shape_ == Shape::Superellipse) {
    const double e = 2.0 / p_;
    return center_ + Point2{a_ * signed_pow(c, e), b_ * signed_pow(s, e)};
  }
  return center_ + Point2{a_ * c, b_ * s};
}

Point2 ConvexDomain::outward_normal(double t) const {
  // Gradient of the level function at the boundary point.
  const Point2 x = boundary(t) - center_;
  Point2 n;
  if (shape_ == Shape::Superellipse) {
    n = {signed_pow(x.x / a_, p_ - 1.0) / a_, signed_pow(x.y / b_, p_ - 1.0) / b_};
  } else {
    n = {x.x / (a_ * a_), x.y / (b_ * b_)};
  }
  const double len = norm(n);
  if (len == 0.0) return {1.0, 0.0};
  return (1.0 / len) * n;
}

double ConvexDomain::level(Point2 x) const {
  const Point2 d = x - center_;
  return std::pow(std::abs(d.x / a_), p_) + std::pow(std::abs(d.y / b_), p_);
}

bool ConvexDomain::contains(Point2 x) const { return level(x) < 1.0; }

double ConvexDomain::radius_at(double theta) const {
  if (shape_ == Shape::Disk) return a_;
  const Point2 u{std::cos(theta), std::sin(theta)};
  const double f = std::pow(std::abs(u.x / a_), p_) + std::pow(std::abs(u.y / b_), p_);
  return std::pow(f, -1.0 / p_);
}

double ConvexDomain::dist_to_boundary(Point2 x) const {
  if (shape_ == Shape::Disk) return std::abs(a_ - norm(x - center_));
  // Coarse scan over the parameter, then golden-section refinement.
  constexpr int kCoarse = 256;
  auto d2 = [&](double t) {
    const Point2 r = boundary(t) - x;
    return dot(r, r);
  };
  int best = 0;
  double best_d = d2(0.0);
  for (int k = 1; k < kCoarse; ++k) {
    const double v = d2(double(k) / kCoarse);
    if (v < best_d) {
      best_d = v;
      best = k;
    }
  }
  double lo = double(best - 1) / kCoarse, hi = double(best + 1) / kCoarse;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
  double f1 = d2(x1), f2 = d2(x2);
  for (int it = 0; it < 80 && hi - lo > 1e-15; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - phi * (hi - lo);
      f1 = d2(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + phi * (hi - lo);
      f2 = d2(x2);
    }
  }
  return std::sqrt(std::min({best_d, f1, f2}));
}

double ConvexDomain::diameter() const {
  if (shape_ != Shape::Superellipse) return 2.0 * std::max(a_, b_);
  // Centrally symmetric: the diameter is twice the largest radius.
  double r = 0.0;
  constexpr int kSamples = 4096;
  for (int k = 0; k < kSamples; ++k) r = std::max(r, norm(boundary(double(k) / kSamples) - center_));
  return 2.0 * r;
}

std::pair<double, double> ConvexDomain::boundary_data_range(int samples) const {
  double lo = g(0.0), hi = lo;
  for (int k = 1; k < samples; ++k) {
    const double v = g(double(k) / samples);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace masolve
