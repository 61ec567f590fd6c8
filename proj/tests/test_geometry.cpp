#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "serrin/error.hpp"
#include "serrin/geometry.hpp"

using namespace serrin;
using doctest::Approx;

namespace {
constexpr double pi = std::numbers::pi;
// Inscribed regular n-gon in a circle of radius R.
double ngon_area(int n, double R) { return 0.5 * n * std::sin(2 * pi / n) * R * R; }
double ngon_perimeter(int n, double R) { return 2.0 * n * std::sin(pi / n) * R; }
// Ellipse 1.2 x 1 perimeter from an independent high-precision evaluation.
constexpr double ellipse_perimeter = 6.925791195809682;
} // namespace

TEST_CASE("polygonize: inscribed square") {
  const auto poly = polygonize(DomainSpec::disk(1.0), 4);
  CHECK(poly.vertices.size() == 4);
  CHECK(poly.signed_area() == Approx(2.0).epsilon(1e-14));
}

TEST_CASE("polygonize: fine disk approaches pi") {
  const auto poly = polygonize(DomainSpec::disk(1.0), 2048);
  CHECK(std::abs(poly.signed_area() - pi) < 1e-5);
  CHECK(poly.signed_area() == Approx(ngon_area(2048, 1.0)).epsilon(1e-13));
  for (auto n : poly.normals)
    CHECK(std::abs(norm(n) - 1.0) < 1e-12);
}

TEST_CASE("polygonize: flat star equals disk") {
  const auto disk = polygonize(DomainSpec::disk(1.0), 256);
  for (int k : {1, 3, 5}) {
    const auto star = polygonize(DomainSpec::star(1.0, 0.0, k), 256);
    REQUIRE(star.vertices.size() == disk.vertices.size());
    for (std::size_t i = 0; i < disk.vertices.size(); ++i)
      CHECK(distance(star.vertices[i], disk.vertices[i]) < 1e-15);
  }
}

TEST_CASE("polygonize: invalid specs are rejected") {
  CHECK_THROWS_AS(polygonize(DomainSpec::disk(-1.0), 64), ValidationError);
  CHECK_THROWS_AS(polygonize(DomainSpec::star(1.0, 1.0, 3), 64), ValidationError);
  CHECK_THROWS_AS(polygonize(DomainSpec::ellipse(0.5, 1.0), 64), ValidationError);
  DomainSpec odd = DomainSpec::disk(1.0);
  odd.boundary_samples = 65;
  CHECK_THROWS_AS(odd.validate(), ValidationError);
}

TEST_CASE("area_perimeter on polygons") {
  SUBCASE("unit disk") {
    const auto ap = area_perimeter(polygonize(DomainSpec::disk(1.0), 2048));
    CHECK(std::abs(ap.area - pi) < 1e-4);
    CHECK(std::abs(ap.perimeter - 2 * pi) < 1e-4);
    CHECK(ap.perimeter == Approx(ngon_perimeter(2048, 1.0)).epsilon(1e-13));
  }
  SUBCASE("ellipse") {
    const auto ap = area_perimeter(polygonize(DomainSpec::ellipse(1.2, 1.0), 4096));
    CHECK(std::abs(ap.area - 1.2 * pi) < 1e-3);
    CHECK(std::abs(ap.perimeter - 6.9257) < 1e-3);
  }
  SUBCASE("square") {
    const auto ap = area_perimeter(polygon_from_vertices({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}));
    CHECK(ap.area == Approx(4.0).epsilon(1e-15));
    CHECK(ap.perimeter == Approx(8.0).epsilon(1e-15));
  }
}

TEST_CASE("exact area and perimeter from the curve") {
  const auto e = exact_area_perimeter(DomainSpec::ellipse(1.2, 1.0));
  CHECK(e.area == Approx(1.2 * pi).epsilon(1e-12));
  CHECK(std::abs(e.perimeter - ellipse_perimeter) < 1e-9);
  const auto d = exact_area_perimeter(DomainSpec::disk(2.0, {0.3, -0.1}));
  CHECK(d.area == Approx(4 * pi).epsilon(1e-12));
  CHECK(d.perimeter == Approx(4 * pi).epsilon(1e-12));
  // Star: area = pi r0^2 (1 + eps^2 / 2).
  const auto s = exact_area_perimeter(DomainSpec::star(1.0, 0.1, 3));
  CHECK(s.area == Approx(pi * 1.005).epsilon(1e-10));
}

TEST_CASE("polygonal area converges at second order") {
  for (const auto &spec : {DomainSpec::disk(1.0), DomainSpec::ellipse(1.2, 1.0), DomainSpec::star(1.0, 0.05, 3)}) {
    const auto exact = exact_area_perimeter(spec);
    const double e1 = exact.area - area_perimeter(polygonize(spec, 128)).area;
    const double e2 = exact.area - area_perimeter(polygonize(spec, 256)).area;
    const double p1 = exact.perimeter - area_perimeter(polygonize(spec, 128)).perimeter;
    const double p2 = exact.perimeter - area_perimeter(polygonize(spec, 256)).perimeter;
    CHECK(e1 / e2 >= 3.5);
    CHECK(e1 / e2 <= 4.5);
    CHECK(p1 / p2 >= 3.5);
    CHECK(p1 / p2 <= 4.5);
  }
}

TEST_CASE("serrin_constant") {
  CHECK(serrin_constant(pi, 2 * pi) == Approx(-0.5).epsilon(1e-15));
  const auto e = exact_area_perimeter(DomainSpec::ellipse(1.2, 1.0));
  CHECK(serrin_constant(e.area, e.perimeter) == Approx(-0.5443293159904481).epsilon(1e-12));
  const auto d = exact_area_perimeter(DomainSpec::disk(2.0));
  CHECK(serrin_constant(d.area, d.perimeter) == Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(serrin_constant(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(serrin_constant(1.0, -1.0), ValidationError);
}

TEST_CASE("serrin_constant is scale covariant") {
  for (double lambda : {0.5, 2.0, 3.7}) {
    for (auto [base, scaled] : {std::pair{DomainSpec::disk(1.0), DomainSpec::disk(lambda)},
                                std::pair{DomainSpec::ellipse(1.2, 1.0), DomainSpec::ellipse(1.2 * lambda, lambda)}}) {
      const auto a = area_perimeter(polygonize(base, 512));
      const auto b = area_perimeter(polygonize(scaled, 512));
      CHECK(std::abs(serrin_constant(b.area, b.perimeter) - lambda * serrin_constant(a.area, a.perimeter)) <
            1e-12);
    }
  }
}

TEST_CASE("rho_bounds") {
  auto r = rho_bounds(DomainSpec::disk(1.0), {0, 0});
  CHECK(r.rho_i == Approx(1.0).epsilon(1e-12));
  CHECK(r.rho_e == Approx(1.0).epsilon(1e-12));
  r = rho_bounds(DomainSpec::ellipse(1.2, 1.0), {0, 0});
  CHECK(r.rho_i == Approx(1.0).epsilon(1e-9));
  CHECK(r.rho_e == Approx(1.2).epsilon(1e-9));
  r = rho_bounds(DomainSpec::disk(1.0), {0.3, 0});
  CHECK(r.rho_i == Approx(0.7).epsilon(1e-9));
  CHECK(r.rho_e == Approx(1.3).epsilon(1e-9));
  // Star r = 1 + eps cos 3t about its centre: extremes 1 -/+ eps.
  r = rho_bounds(DomainSpec::star(1.0, 0.05, 3), {0, 0});
  CHECK(r.rho_i == Approx(0.95).epsilon(1e-9));
  CHECK(r.rho_e == Approx(1.05).epsilon(1e-9));
  CHECK_THROWS_AS(rho_bounds(DomainSpec::disk(1.0), {1.5, 0}), ValidationError);
  CHECK_THROWS_AS(rho_bounds(DomainSpec::disk(1.0), {1.0, 0}), ValidationError);
}

TEST_CASE("rho_bounds: gap vanishes only for a disk about its centre") {
  const DomainSpec fixtures[] = {DomainSpec::disk(1.0), DomainSpec::ellipse(1.2, 1.0),
                                 DomainSpec::star(1.0, 0.08, 3)};
  for (const auto &spec : fixtures) {
    const Curve curve(spec);
    for (Vec2 z : {Vec2{0, 0}, Vec2{0.2, 0.1}}) {
      const auto r = rho_bounds(spec, z);
      CHECK(r.rho_i <= r.rho_e);
      CHECK(r.rho_e <= curve.diameter() + 1e-12);
      const bool zero_gap = r.rho_e - r.rho_i < 1e-9;
      const bool disk_centre = spec.kind == ShapeKind::disk && norm(z) == 0.0;
      CHECK(zero_gap == disk_centre);
    }
  }
}

TEST_CASE("inclusion_margin") {
  auto m = inclusion_margin(DomainSpec::disk(1.0), InclusionSpec::disk(0.5));
  CHECK(m.margin == Approx(0.5).epsilon(1e-9));
  CHECK(m.M == Approx(2.0).epsilon(1e-9));
  m = inclusion_margin(DomainSpec::disk(1.0), InclusionSpec::disk(0.3, {0.5, 0}));
  CHECK(m.margin == Approx(0.2).epsilon(1e-9));
  CHECK(m.M == Approx(5.0).epsilon(1e-9));
  CHECK_THROWS_AS(inclusion_margin(DomainSpec::disk(1.0), InclusionSpec::disk(0.6, {0.5, 0})), ValidationError);
  m = inclusion_margin(DomainSpec::disk(1.0), InclusionSpec::none());
  CHECK(std::isinf(m.margin));
  // Large margins clamp M at 1.
  m = inclusion_margin(DomainSpec::disk(5.0), InclusionSpec::disk(0.5));
  CHECK(m.M == 1.0);
}

TEST_CASE("curve geometry") {
  const Curve e(DomainSpec::ellipse(1.2, 1.0));
  // Curvature of an ellipse at the end of the major axis: a / b^2.
  CHECK(e.curvature(0.0) == Approx(1.2).epsilon(1e-12));
  CHECK(e.curvature(pi / 2) == Approx(1.0 / 1.44).epsilon(1e-12));
  CHECK(e.diameter() == Approx(2.4).epsilon(1e-9));
  const Vec2 n = e.outward_normal(0.3);
  const Vec2 tangent = e.derivative(0.3);
  CHECK(std::abs(dot(n, tangent)) < 1e-14);
  CHECK(dot(n, e.point(0.3)) > 0);
  CHECK(e.contains({1.1, 0}));
  CHECK_FALSE(e.contains({1.21, 0}));
}
