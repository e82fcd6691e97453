#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "masolve/domain.hpp"
#include "masolve/errors.hpp"
#include "masolve/measures.hpp"
#include "masolve/mesh.hpp"
#include "masolve/quadrature.hpp"

using namespace masolve;
using std::numbers::pi;

namespace {

ConvexPolygon regular_polygon(int n, double r) {
  std::vector<Point2> v;
  for (int k = 0; k < n; ++k) v.push_back({r * std::cos(2 * pi * k / n), r * std::sin(2 * pi * k / n)});
  return ConvexPolygon::from_ccw(v);
}

double star_area(const Mesh& mesh, int v) {
  double a = 0.0;
  for (int t : mesh.star(v)) {
    const auto& tri = mesh.triangles()[t];
    a += 0.5 * orient(mesh.vertex(tri[0]), mesh.vertex(tri[1]), mesh.vertex(tri[2]));
  }
  return a;
}

}  // namespace

TEST_CASE("quadrature rules integrate polynomials of their degree exactly") {
  const std::array<Point2, 3> tri{Point2{0.1, 0.2}, Point2{1.3, 0.4}, Point2{0.5, 1.1}};
  const std::array<std::array<Point2, 3>, 1> tris{tri};
  QuadratureConfig cfg;
  cfg.max_subdivisions = 0;
  // Oracle: the degree-5 monomial integrated through its exact Green form,
  // compared against an adaptive run with a very tight tolerance.
  auto f = [](Point2 x) { return std::array<double, 1>{std::pow(x.x, 3) * x.y * x.y + 2 * x.x - 1}; };
  const double coarse = integrate_triangles<1>(tris, f, cfg).value[0];
  QuadratureConfig tight;
  tight.rel_tol = 1e-14;
  tight.abs_tol = 0.0;
  const double fine = integrate_triangles<1>(tris, f, tight).value[0];
  CHECK(coarse == doctest::Approx(fine).epsilon(1e-13));
  // Affine integrand with the degree-1 rule: area times the centroid value.
  cfg.triangle_rule_order = 1;
  auto lin = [](Point2 x) { return std::array<double, 1>{3 * x.x - x.y + 2}; };
  const Point2 c = (1.0 / 3.0) * (tri[0] + tri[1] + tri[2]);
  const double area = 0.5 * orient(tri[0], tri[1], tri[2]);
  CHECK(integrate_triangles<1>(tris, lin, cfg).value[0] == doctest::Approx(area * (3 * c.x - c.y + 2)));
  CHECK_THROWS_AS(triangle_rule(3), std::invalid_argument);
}

TEST_CASE("1D adaptive integration") {
  CHECK(integrate_interval([](double x) { return std::exp(x); }, 0.0, 1.0) == doctest::Approx(std::exp(1.0) - 1.0));
  CHECK(integrate_interval([](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 10.0) ==
        doctest::Approx(std::atan(10.0)).epsilon(1e-12));
}

TEST_CASE("g_R closed forms and inverse") {
  const auto one = SlopeDensity::constant(1.0);
  const auto gauss = SlopeDensity::gauss_curvature(2.0);
  for (double rho : {0.0, 0.1, 0.5, 1.0, 2.7, 10.0}) {
    CHECK(g_R(one, rho) == doctest::Approx(pi * rho * rho).epsilon(1e-12));
    CHECK(g_R(gauss, rho) == doctest::Approx(pi * rho * rho / (1 + rho * rho)).epsilon(1e-12));
    if (rho > 0.0) {
      CHECK(g_R_inverse(one, pi * rho * rho) == doctest::Approx(rho).epsilon(1e-10));
      CHECK(g_R_inverse(gauss, g_R(gauss, rho)) == doctest::Approx(rho).epsilon(1e-9));
    }
  }
  CHECK(g_R_inverse(one, pi) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gauss.total_mass() == doctest::Approx(pi));
  CHECK_THROWS_AS(g_R_inverse(gauss, pi), MassExceedsTotal);
  CHECK_THROWS_AS(g_R_inverse(one, -1.0), std::invalid_argument);
  CHECK(std::isinf(one.total_mass()));

  // q = 3: g_R = pi/2 (1 - (1 + rho^2)^-2).
  const auto g3 = SlopeDensity::gauss_curvature(3.0);
  CHECK(g_R(g3, 1.5) == doctest::Approx(0.5 * pi * (1 - std::pow(1 + 2.25, -2))).epsilon(1e-12));
  CHECK(g3.total_mass() == doctest::Approx(pi / 2));

  // Power tail: 2 pi int_0^r0 C0 r0^-2k r dr + 2 pi int_r0^rho C0 r^{1-2k} dr.
  const auto tail = SlopeDensity::power_tail(2.0, 1.5, 0.5);
  const double inner = 2.0 * std::pow(0.5, -3.0) * pi * 0.25;
  const double outer = 2 * pi * 2.0 * (std::pow(0.5, -1.0) - std::pow(3.0, -1.0));
  CHECK(g_R(tail, 3.0) == doctest::Approx(inner + outer).epsilon(1e-11));
  CHECK(tail.total_mass() == doctest::Approx(inner + 2 * pi * 2.0 * 2.0).epsilon(1e-12));
  const auto dp = tail.decay();
  CHECK(dp.k == doctest::Approx(1.5));
  CHECK(dp.C0 == doctest::Approx(2.0));
}

TEST_CASE("integral of the curvature kernel over the 64-gon") {
  const auto gauss = SlopeDensity::gauss_curvature(2.0);
  const auto poly = regular_polygon(64, 1.0);
  QuadratureConfig budget;
  budget.max_subdivisions = 20000;  // 62 fan triangles at rel_tol 1e-10
  const Integral I = integrate_R_over_polygon(gauss, poly, budget);
  CHECK(I.converged);
  // Oracle: polar form, the radial integral of r/(1+r^2)^2 is closed.
  const double a = pi / 64, apothem = std::cos(a);
  const double sector = integrate_interval(
      [&](double th) {
        const double r = apothem / std::cos(th);
        return 0.5 * (1.0 - 1.0 / (1.0 + r * r));
      },
      -a, a, 1e-14);
  CHECK(I.value == doctest::Approx(64 * sector).epsilon(1e-9));
  CHECK(I.value == doctest::Approx(pi / 2).epsilon(2e-3));
  CHECK(I.value < pi / 2);

  const auto one = SlopeDensity::constant(3.0);
  CHECK(integrate_R_over_polygon(one, poly, {}).value == doctest::Approx(3.0 * polygon_area(poly)));
  CHECK(integrate_R_over_polygon(gauss, ConvexPolygon::degenerate({{0, 0}, {1, 1}}), {}).value == 0.0);
}

TEST_CASE("tabulated slope density from CSV") {
  const auto path = std::filesystem::temp_directory_path() / "masolve_tab_test.csv";
  {
    std::ofstream out(path);
    out << "px,py,value\n";
    for (double y : {-2.0, 0.0, 2.0}) {
      for (double x : {-2.0, 0.0, 2.0}) out << x << "," << y << "," << (1.0 + 0.25 * x) << "\n";
    }
  }
  const auto R = SlopeDensity::load_tabulated(path.string());
  std::filesystem::remove(path);
  CHECK(!R.radial());
  CHECK(R({1.0, 0.3}) == doctest::Approx(1.25));
  CHECK(R({5.0, 0.0}) == doctest::Approx(1.5));  // constant extension
  // Odd part cancels over a centred disk.
  CHECK(g_R(R, 1.5) == doctest::Approx(pi * 2.25).epsilon(1e-9));
  const auto sq = ConvexPolygon::from_ccw({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(integrate_R_over_polygon(R, sq, {}).value == doctest::Approx(1.125).epsilon(1e-10));
}

TEST_CASE("target masses of a unit density are a third of the star area") {
  const auto dom = ConvexDomain::disk({}, 1.0);
  const Mesh mesh = build_mesh(dom, 24, 0.3);
  const SourceMeasure mu(SourceDensity::constant(1.0), {});
  bool ok = false;
  const auto m = target_masses(mesh, mu, {}, &ok);
  CHECK(ok);
  REQUIRE(static_cast<int>(m.size()) == mesh.num_interior());
  for (int i = 0; i < mesh.num_interior(); ++i) CHECK(m[i] == doctest::Approx(star_area(mesh, i) / 3).epsilon(1e-12));
}

TEST_CASE("target masses of a radial polynomial match an independent hat integral") {
  const auto dom = ConvexDomain::disk({}, 1.0);
  const Mesh mesh = build_mesh(dom, 16, 0.4);
  const SourceMeasure mu(SourceDensity::radial_polynomial({1.0, 0.0, 2.0}), {});
  const auto m = target_masses(mesh, mu, {});
  // Oracle: dense fixed midpoint grid of hat * density.
  const int n = 1200;
  std::vector<double> oracle(mesh.num_interior(), 0.0);
  const double hstep = 2.0 / n;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      const Point2 x{-1 + (a + 0.5) * hstep, -1 + (b + 0.5) * hstep};
      const int t = mesh.locate(x);
      if (t < 0) continue;
      const auto bc = mesh.barycentric(t, x);
      const double f = 1.0 + 2.0 * dot(x, x);
      for (int j = 0; j < 3; ++j) {
        const int v = mesh.triangles()[t][j];
        if (!mesh.is_boundary(v)) oracle[v] += bc[j] * f * hstep * hstep;
      }
    }
  }
  for (int i = 0; i < mesh.num_interior(); ++i) CHECK(m[i] == doctest::Approx(oracle[i]).epsilon(2e-3));
}

TEST_CASE("an atom at a vertex only feeds that vertex") {
  const auto dom = ConvexDomain::disk({}, 1.0);
  const Mesh mesh = build_mesh(dom, 16, 0.4);
  const int i = mesh.num_interior() / 2;
  const SourceMeasure mu(SourceDensity::zero(), {{mesh.vertex(i), 0.7}});
  const auto m = target_masses(mesh, mu, {});
  for (int j = 0; j < mesh.num_interior(); ++j) CHECK(m[j] == doctest::Approx(j == i ? 0.7 : 0.0).epsilon(1e-14));
  // An atom at a triangle centroid splits evenly over its interior vertices.
  const auto& tri = mesh.triangles()[mesh.star(i)[0]];
  const Point2 c = (1.0 / 3.0) * (mesh.vertex(tri[0]) + mesh.vertex(tri[1]) + mesh.vertex(tri[2]));
  const auto m2 = target_masses(mesh, SourceMeasure(SourceDensity::zero(), {{c, 0.9}}), {});
  for (int v : tri) {
    if (!mesh.is_boundary(v)) CHECK(m2[v] == doctest::Approx(0.3).epsilon(1e-12));
  }
}

TEST_CASE("truncated measures") {
  const auto dom = ConvexDomain::disk({}, 1.0);
  const Mesh mesh = build_mesh(dom, 64, 2 * pi / 64);
  const SourceMeasure mu(SourceDensity::constant(1.0), {});
  const auto cut = truncate_measure(mu, dom, 0.5);
  CHECK(cut.delta() == 0.5);
  CHECK(cut.in_support({0.49, 0.0}));
  CHECK(!cut.in_support({0.51, 0.0}));
  CHECK(cut.density_at({0.7, 0.0}) == 0.0);
  double total = 0.0;
  for (double v : target_masses(mesh, cut, {})) total += v;
  CHECK(total == doctest::Approx(pi / 4).epsilon(1e-4));
  // Truncating again keeps the deeper cut.
  CHECK(truncate_measure(truncate_measure(mu, dom, 0.2), dom, 0.1).delta() == 0.2);
  CHECK(truncate_measure(truncate_measure(mu, dom, 0.1), dom, 0.2).delta() == 0.2);

  // An atom closer than delta to the boundary is dropped.
  const SourceMeasure atom(SourceDensity::zero(), {{{0.9, 0.0}, 1.0}});
  double kept = 0.0;
  for (double v : target_masses(mesh, truncate_measure(atom, dom, 0.2), {})) kept += v;
  CHECK(kept == 0.0);
  // Untruncated, the atom splits by barycentric weight; the part on the
  // boundary vertex is not a target.
  const int t = mesh.locate({0.9, 0.0});
  REQUIRE(t >= 0);
  const auto bc = mesh.barycentric(t, {0.9, 0.0});
  double expect = 0.0;
  for (int j = 0; j < 3; ++j) expect += mesh.is_boundary(mesh.triangles()[t][j]) ? 0.0 : bc[j];
  double full = 0.0;
  for (double v : target_masses(mesh, atom, {})) full += v;
  CHECK(full == doctest::Approx(expect).epsilon(1e-14));
  CHECK(full > 0.0);
}

TEST_CASE("truncated targets do not increase with delta") {
  const auto dom = ConvexDomain::ellipse({}, 1.2, 0.9);
  const Mesh mesh = build_mesh(dom, 32, 0.2);
  const SourceMeasure mu(SourceDensity::radial_polynomial({1.0, 1.0}), {});
  std::vector<double> prev = target_masses(mesh, mu, {});
  for (double d : {0.05, 0.1, 0.2, 0.4}) {
    const auto m = target_masses(mesh, truncate_measure(mu, dom, d), {});
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i] <= prev[i] + 1e-15);
    prev = m;
  }
}

TEST_CASE("source mass") {
  const auto dom = ConvexDomain::disk({}, 1.0);
  CHECK(source_mass(SourceMeasure(SourceDensity::constant(1.0), {}), dom) == doctest::Approx(pi).epsilon(1e-12));
  CHECK(source_mass(SourceMeasure(SourceDensity::radial_polynomial({1.0, 3.0}), {}), dom) ==
        doctest::Approx(pi + 2 * pi).epsilon(1e-12));
  const SourceMeasure atoms(SourceDensity::zero(), {{{0.2, 0.1}, 0.5}, {{2.0, 0.0}, 7.0}});
  CHECK(source_mass(atoms, dom) == doctest::Approx(0.5));
  const auto ell = ConvexDomain::ellipse({1.0, 1.0}, 2.0, 0.5);
  CHECK(source_mass(SourceMeasure(SourceDensity::constant(2.0), {}), ell) == doctest::Approx(2 * pi).epsilon(1e-10));
}

TEST_CASE("assumption validation") {
  const auto dom = ConvexDomain::disk({}, 1.0);
  const SourceMeasure lebesgue(SourceDensity::constant(1.0), {});
  const auto gauss = SlopeDensity::gauss_curvature(2.0);

  const auto bad = validate_assumptions(derive_profile(dom, gauss, lebesgue), gauss, lebesgue, dom);
  CHECK(!bad.mass_gap_ok);
  CHECK(!bad.solvable());
  CHECK(bad.source_mass == doctest::Approx(pi));
  CHECK(bad.slope_mass == doctest::Approx(pi));

  const SourceMeasure half(SourceDensity::constant(0.5), {});
  const auto good = validate_assumptions(derive_profile(dom, gauss, half), gauss, half, dom);
  CHECK(good.mass_gap_ok);
  CHECK(good.solvable());

  AssumptionProfile p;
  p.tau = 0.0;
  p.lambda = 0.0;
  CHECK(p.K() == doctest::Approx(1.5));
  p.k = 2.0;
  CHECK(!p.exponent_condition());
  p.k = 1.5;
  CHECK(p.exponent_condition());
  p.k = 0.5;
  CHECK(p.exponent_condition());
  p.k = 1.2;
  CHECK(p.exponent_condition());
  p.tau = 2.0;  // K = 5/4
  p.k = 1.25;
  CHECK(p.exponent_condition());
  p.k = 1.3;
  CHECK(!p.exponent_condition());

  const auto gp = derive_profile(dom, gauss, half);
  CHECK(gp.k == doctest::Approx(2.0));
  CHECK(gp.tau == 0.0);
  CHECK(gp.eta > 0.0);
  const auto rep = validate_assumptions(gp, gauss, half, dom);
  CHECK(!rep.exponent_ok);
  CHECK(rep.decay_ok);
  CHECK(rep.parabolic_ok);
  CHECK(rep.source_decay_ok);

  const auto sup = ConvexDomain::superellipse({}, 1.0, 1.0, 4.0);
  CHECK(derive_profile(sup, SlopeDensity::constant(1.0), half).tau == doctest::Approx(2.0));
}

TEST_CASE("polygon integrals do not depend on the vertex listing") {
  const auto gauss = SlopeDensity::gauss_curvature(2.0);
  std::vector<Point2> v{{-0.45, -0.45}, {-0.15, -0.45}, {-0.15, -0.15}, {-0.45, -0.15}};
  const double ref = integrate_R_over_polygon(gauss, ConvexPolygon::from_ccw(v), {}).value;
  for (int r = 1; r < 4; ++r) {
    std::rotate(v.begin(), v.begin() + 1, v.end());
    CHECK(integrate_R_over_polygon(gauss, ConvexPolygon::from_ccw(v), {}).value == ref);
  }
  // Rounding-level perturbations and a duplicated vertex change nothing
  // beyond rounding.
  std::vector<Point2> w{{-0.45000000000000001, -0.44999999999999996}, {-0.14999999999999994, -0.45},
                        {-0.15, -0.15000000000000002}, {-0.15, -0.15}, {-0.44999999999999996, -0.15}};
  CHECK(integrate_R_over_polygon(gauss, ConvexPolygon::from_ccw(w), {}).value == doctest::Approx(ref).epsilon(1e-14));
}
