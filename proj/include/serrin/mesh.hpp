#pragma once

// Conforming triangulations of a domain with an optional inclusion whose
// boundary is resolved by element edges.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "serrin/geometry.hpp"

namespace serrin {

enum class Region : std::uint8_t { outside_D = 0, inside_D = 1 };

/// Which analytic curve a vertex lies on.
enum class CurveTag : std::uint8_t { interior = 0, boundary = 1, interface = 2 };

struct Triangle {
  std::array<int, 3> v{};
  Region region = Region::outside_D;
};

struct BoundaryEdge {
  std::array<int, 2> v{};
  Vec2 normal{};
};

struct Mesh {
  std::uint64_t id = 0;
  DomainSpec domain;
  InclusionSpec inclusion;

  std::vector<Vec2> vertices;
  std::vector<CurveTag> vertex_tag;
  /// Curve parameter for boundary and interface vertices, 0 otherwise.
  std::vector<double> vertex_param;
  std::vector<Triangle> triangles;
  /// Counterclockwise loop; edge i joins boundary_vertex_ids[i] and [i+1].
  std::vector<BoundaryEdge> boundary_edges;
  std::vector<int> boundary_vertex_ids;
  double h_max = 0.0;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  double triangle_area(std::size_t t) const;
  Vec2 centroid(std::size_t t) const;
  double area() const;
  /// Sum of the areas of triangles tagged inside_D.
  double inclusion_area() const;
  double min_angle_degrees() const;
  bool is_boundary_vertex(int v) const { return vertex_tag[static_cast<std::size_t>(v)] == CurveTag::boundary; }
  /// Throws MeshQualityError describing the first violated invariant.
  void check_invariants(double min_angle_deg = 20.0) const;
};

struct MeshOptions {
  double min_angle_deg = 25.0;
  /// Refinement stops growing once this many vertices exist.
  std::size_t max_vertices = 2'000'000;
};

/// Delaunay refinement mesh of the domain with the inclusion boundary as
/// internal constraint. Deterministic in (domain, inclusion, target_h).
Mesh generate(const DomainSpec &domain, const InclusionSpec &inclusion, double target_h,
              const MeshOptions &options = {});

/// Uniform red refinement; new curve midpoints are placed on the curves.
Mesh refine(const Mesh &mesh);

/// Next process-unique mesh id.
std::uint64_t next_mesh_id();

/// Plain-text dump: VERTICES / TRIANGLES / BOUNDARY_EDGES sections.
void write_mesh(std::ostream &out, const Mesh &mesh);

} // namespace serrin
