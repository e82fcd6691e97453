#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

#include "masolve/geometry.hpp"

namespace masolve {

struct QuadratureConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-15;
  int max_subdivisions = 2000;
  int triangle_rule_order = 5;  // 1, 2 or 5
};

/// Symmetric triangle rule: barycentric nodes and weights summing to one.
struct TriangleRule {
  std::vector<std::array<double, 3>> nodes;
  std::vector<double> weights;
};

/// Rule of the given polynomial degree (1, 2 or 5). The degree-5 rule is the
/// classical 7-point symmetric rule.
const TriangleRule& triangle_rule(int order);

template <std::size_t N>
struct QuadResult {
  std::array<double, N> value{};
  double error = 0.0;
  int subdivisions = 0;
  bool converged = true;
};

namespace detail {

struct Tri2 {
  Point2 a, b, c;
  double area() const { return 0.5 * std::abs(orient(a, b, c)); }
};

template <std::size_t N, class F>
std::array<double, N> apply_rule(const TriangleRule& rule, const Tri2& t, F& f) {
  std::array<double, N> acc{};
  const double area = t.area();
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const auto& l = rule.nodes[q];
    const Point2 x = l[0] * t.a + l[1] * t.b + l[2] * t.c;
    const std::array<double, N> v = f(x);
    for (std::size_t k = 0; k < N; ++k) acc[k] += rule.weights[q] * v[k];
  }
  for (auto& v : acc) v *= area;
  return acc;
}

// Split across the longest edge.
inline std::array<Tri2, 2> bisect(const Tri2& t) {
  const double ab = norm(t.b - t.a), bc = norm(t.c - t.b), ca = norm(t.a - t.c);
  if (ab >= bc && ab >= ca) {
    const Point2 m = 0.5 * (t.a + t.b);
    return {Tri2{t.a, m, t.c}, Tri2{m, t.b, t.c}};
  }
  if (bc >= ca) {
    const Point2 m = 0.5 * (t.b + t.c);
    return {Tri2{t.b, m, t.a}, Tri2{m, t.c, t.a}};
  }
  const Point2 m = 0.5 * (t.c + t.a);
  return {Tri2{t.c, m, t.b}, Tri2{m, t.a, t.b}};
}

template <std::size_t N>
double max_abs(const std::array<double, N>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace detail

/// Globally adaptive integration of a vector-valued integrand over a union of
/// triangles. Each element carries the rule on itself (coarse) and on its two
/// longest-edge halves (fine); the element with the largest |coarse - fine|
/// is split until the summed estimate meets max(abs_tol, rel_tol |I|) or the
/// subdivision budget is spent. Deterministic: ties are broken by insertion.
template <std::size_t N, class F>
QuadResult<N> integrate_triangles(std::span<const std::array<Point2, 3>> triangles, F&& f,
                                  const QuadratureConfig& cfg) {
  using detail::Tri2;
  const TriangleRule& rule = triangle_rule(cfg.triangle_rule_order);
  struct Elem {
    Tri2 tri;
    std::array<Tri2, 2> halves;
    std::array<std::array<double, N>, 2> half_values;
    std::array<double, N> fine;
    double error;
    long serial;
  };
  auto make = [&](const Tri2& t, const std::array<double, N>& coarse, long serial) {
    Elem e{t, detail::bisect(t), {}, {}, 0.0, serial};
    for (int h = 0; h < 2; ++h) e.half_values[h] = detail::apply_rule<N>(rule, e.halves[h], f);
    std::array<double, N> diff{};
    for (std::size_t k = 0; k < N; ++k) {
      e.fine[k] = e.half_values[0][k] + e.half_values[1][k];
      diff[k] = e.fine[k] - coarse[k];
    }
    e.error = detail::max_abs(diff);
    return e;
  };
  auto cmp = [](const Elem& x, const Elem& y) {
    return x.error < y.error || (x.error == y.error && x.serial > y.serial);
  };
  std::priority_queue<Elem, std::vector<Elem>, decltype(cmp)> heap(cmp);

  QuadResult<N> res;
  long serial = 0;
  for (const auto& t : triangles) {
    const Tri2 tri{t[0], t[1], t[2]};
    if (tri.area() == 0.0) continue;
    heap.push(make(tri, detail::apply_rule<N>(rule, tri, f), serial++));
  }
  auto totals = [&]() {
    // Summation in serial order keeps the result independent of heap layout.
    auto copy = heap;
    std::vector<Elem> store;
    store.reserve(copy.size());
    while (!copy.empty()) {
      store.push_back(copy.top());
      copy.pop();
    }
    std::sort(store.begin(), store.end(), [](const Elem& x, const Elem& y) { return x.serial < y.serial; });
    std::array<double, N> sum{};
    double err = 0.0;
    for (const auto& e : store) {
      for (std::size_t k = 0; k < N; ++k) sum[k] += e.fine[k];
      err += e.error;
    }
    return std::pair{sum, err};
  };

  // Running sums are only used for the stopping test; the final value is
  // recomputed in a fixed order.
  std::array<double, N> run_sum{};
  double run_err = 0.0;
  {
    auto [s, e] = totals();
    run_sum = s;
    run_err = e;
  }
  while (!heap.empty()) {
    const double target = std::max(cfg.abs_tol, cfg.rel_tol * detail::max_abs(run_sum));
    if (run_err <= target) break;
    if (res.subdivisions >= cfg.max_subdivisions) {
      res.converged = false;
      break;
    }
    Elem top = heap.top();
    heap.pop();
    for (std::size_t k = 0; k < N; ++k) run_sum[k] -= top.fine[k];
    run_err -= top.error;
    for (int h = 0; h < 2; ++h) {
      Elem child = make(top.halves[h], top.half_values[h], serial++);
      for (std::size_t k = 0; k < N; ++k) run_sum[k] += child.fine[k];
      run_err += child.error;
      heap.push(std::move(child));
    }
    ++res.subdivisions;
  }
  auto [sum, err] = totals();
  res.value = sum;
  res.error = err;
  return res;
}

/// Adaptive Gauss-Legendre integration of a scalar function on [a, b]
/// (5-point rule against its two halves, recursive).
template <class F>
double integrate_interval(F&& f, double a, double b, double rel_tol = 1e-13, double abs_tol = 0.0,
                          int max_depth = 30) {
  static constexpr std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831,
                                          -0.9061798459386640, 0.9061798459386640};
  static constexpr std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                          0.2369268850561891, 0.2369268850561891};
  auto gl = [&](double lo, double hi) {
    const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += w[k] * f(c + r * x[k]);
    return s * r;
  };
  auto rec = [&](auto&& self, double lo, double hi, double whole, double tol, int depth) -> double {
    const double mid = 0.5 * (lo + hi);
    const double left = gl(lo, mid), right = gl(mid, hi);
    if (depth >= max_depth || std::abs(left + right - whole) <= tol) return left + right;
    return self(self, lo, mid, left, 0.5 * tol, depth + 1) + self(self, mid, hi, right, 0.5 * tol, depth + 1);
  };
  if (a == b) return 0.0;
  const double whole = gl(a, b);
  const double tol = std::max({rel_tol * std::abs(whole), abs_tol, 1e-300});
  return rec(rec, a, b, whole, tol, 0);
}

}  // namespace masolve
