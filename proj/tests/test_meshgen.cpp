#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "serrin/error.hpp"
#include "serrin/mesh.hpp"

using namespace serrin;

namespace {
constexpr double pi = std::numbers::pi;

std::size_t edge_count(const Mesh &m) {
  std::set<std::pair<int, int>> edges;
  for (const auto &t : m.triangles)
    for (int i = 0; i < 3; ++i) {
      int a = t.v[static_cast<std::size_t>(i)], b = t.v[static_cast<std::size_t>((i + 1) % 3)];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  return edges.size();
}
} // namespace

TEST_CASE("disk mesh: boundary vertices on the circle") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.2);
  CHECK_NOTHROW(m.check_invariants());
  CHECK(m.min_angle_degrees() >= 20.0);
  CHECK(m.h_max <= 1.5 * 0.2);
  for (int b : m.boundary_vertex_ids)
    CHECK(std::abs(norm(m.vertices[static_cast<std::size_t>(b)]) - 1.0) < 1e-12);
}

TEST_CASE("concentric inclusion: tagged area close to pi/4") {
  const double h = 0.1;
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::disk(0.5), h);
  CHECK_NOTHROW(m.check_invariants());
  CHECK(std::abs(m.inclusion_area() - pi / 4) <= 2 * h * h);
  // Partition of the mesh area by region tag.
  double inside = 0, outside = 0;
  for (std::size_t t = 0; t < m.triangles.size(); ++t)
    (m.triangles[t].region == Region::inside_D ? inside : outside) += m.triangle_area(t);
  CHECK(std::abs(inside + outside - m.area()) < 1e-12);
  // Interface vertices lie on the inclusion circle.
  int interface_vertices = 0;
  for (std::size_t v = 0; v < m.vertices.size(); ++v)
    if (m.vertex_tag[v] == CurveTag::interface) {
      ++interface_vertices;
      CHECK(std::abs(norm(m.vertices[v]) - 0.5) < 1e-12);
    }
  CHECK(interface_vertices >= 24);
}

TEST_CASE("degenerate target size is rejected") {
  CHECK_THROWS_AS(generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.0), ValidationError);
  CHECK_THROWS_AS(generate(DomainSpec::disk(1.0), InclusionSpec::none(), -0.1), ValidationError);
  CHECK_THROWS_AS(generate(DomainSpec::disk(1.0), InclusionSpec::disk(0.6, {0.5, 0}), 0.1), ValidationError);
}

TEST_CASE("mesh invariants over fixtures") {
  struct Case {
    DomainSpec d;
    InclusionSpec i;
    double h;
  };
  const Case cases[] = {
      {DomainSpec::ellipse(1.2, 1.0), InclusionSpec::disk(0.3), 0.05},
      {DomainSpec::ellipse(1.2, 1.0), InclusionSpec::disk(0.05), 0.05},
      {DomainSpec::star(1.0, 0.08, 3), InclusionSpec::none(), 0.05},
      {DomainSpec::disk(1.0, {0.3, 0.1}), InclusionSpec::ellipse(0.3, 0.2, {0.4, 0.1}), 0.05},
      {DomainSpec::disk(1.0), InclusionSpec::disk(0.3, {0.5, 0}), 0.04},
      {DomainSpec::polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}), InclusionSpec::none(), 0.1},
  };
  for (const auto &c : cases) {
    const Mesh m = generate(c.d, c.i, c.h);
    CHECK_NOTHROW(m.check_invariants());
    CHECK(m.h_max <= 1.5 * c.h);
    const std::size_t V = m.vertices.size(), E = edge_count(m), T = m.triangles.size();
    CHECK(static_cast<long>(V) - static_cast<long>(E) + static_cast<long>(T) == 1);
    // Outward normals point away from the centre for star-shaped fixtures.
    const Vec2 centre = Curve(c.d).center();
    for (const auto &e : m.boundary_edges) {
      const Vec2 mid = 0.5 * (m.vertices[static_cast<std::size_t>(e.v[0])] + m.vertices[static_cast<std::size_t>(e.v[1])]);
      CHECK(dot(e.normal, mid - centre) > 0);
      CHECK(std::abs(norm(e.normal) - 1.0) < 1e-12);
    }
    // Centroid classification matches the tag.
    if (!c.i.empty()) {
      const Curve inner(c.i);
      for (std::size_t t = 0; t < m.triangles.size(); ++t)
        CHECK((m.triangles[t].region == Region::inside_D) == inner.contains(m.centroid(t)));
    }
  }
}

TEST_CASE("square mesh covers the square exactly") {
  const Mesh m = generate(DomainSpec::polygon({{-1, -1}, {1, -1}, {1, 1}, {-1, 1}}), InclusionSpec::none(), 0.1);
  CHECK(m.area() == doctest::Approx(4.0).epsilon(1e-13));
}

TEST_CASE("refine: 1:4 split with curve projection") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::disk(0.5), 0.1);
  const Mesh r = refine(m);
  CHECK(r.triangles.size() == 4 * m.triangles.size());
  CHECK_NOTHROW(r.check_invariants());
  CHECK(r.h_max <= 0.55 * m.h_max);
  CHECK(r.h_max >= 0.45 * m.h_max);
  for (int b : r.boundary_vertex_ids)
    CHECK(std::abs(norm(r.vertices[static_cast<std::size_t>(b)]) - 1.0) < 1e-12);
  for (std::size_t v = 0; v < r.vertices.size(); ++v)
    if (r.vertex_tag[v] == CurveTag::interface)
      CHECK(std::abs(norm(r.vertices[v]) - 0.5) < 1e-12);
  const double e0 = pi / 4 - m.inclusion_area();
  const double e1 = pi / 4 - r.inclusion_area();
  CHECK(e0 / e1 >= 3.5);
  CHECK(e0 / e1 <= 4.5);
  CHECK(r.id != m.id);
}

TEST_CASE("generation is deterministic") {
  const Mesh a = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::disk(0.3), 0.05);
  const Mesh b = generate(DomainSpec::ellipse(1.2, 1.0), InclusionSpec::disk(0.3), 0.05);
  std::ostringstream sa, sb;
  write_mesh(sa, a);
  write_mesh(sb, b);
  CHECK(sa.str() == sb.str());
}

TEST_CASE("mesh dump format") {
  const Mesh m = generate(DomainSpec::disk(1.0), InclusionSpec::none(), 0.3);
  std::ostringstream out;
  write_mesh(out, m);
  std::istringstream in(out.str());
  std::string section;
  std::size_t n = 0;
  in >> section >> n;
  CHECK(section == "VERTICES");
  CHECK(n == m.vertices.size());
  for (std::size_t i = 0; i < n; ++i) {
    double x, y;
    in >> x >> y;
    CHECK(x == m.vertices[i].x);
    CHECK(y == m.vertices[i].y);
  }
  in >> section >> n;
  CHECK(section == "TRIANGLES");
  CHECK(n == m.triangles.size());
  for (std::size_t i = 0; i < n; ++i) {
    int a, b, c, region;
    in >> a >> b >> c >> region;
  }
  in >> section >> n;
  CHECK(section == "BOUNDARY_EDGES");
  CHECK(n == m.boundary_edges.size());
}
