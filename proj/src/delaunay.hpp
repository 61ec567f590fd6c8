#pragma once

// Incremental Bowyer-Watson Delaunay triangulation with adjacency.
// Internal to the mesh generator.

#include <array>
#include <vector>

#include "serrin/vec2.hpp"

namespace serrin::detail {

/// > 0 if (a, b, c) is counterclockwise. Exact sign.
int orient(Vec2 a, Vec2 b, Vec2 c);
/// > 0 if d lies strictly inside the circumcircle of ccw (a, b, c). Exact sign.
int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d);

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c);

class DelaunayTriangulation {
public:
  struct Tri {
    std::array<int, 3> v{};
    /// nbr[i] is across the edge opposite v[i]; -1 on the hull.
    std::array<int, 3> nbr{-1, -1, -1};
    bool alive = true;
  };

  static constexpr int super_vertices = 3;

  /// Points must lie within [lo, hi].
  DelaunayTriangulation(Vec2 lo, Vec2 hi);

  /// Returns the new vertex index, or -1 for a duplicate point.
  int insert(Vec2 p);
  /// Index of an alive triangle containing p (possibly on its boundary).
  int locate(Vec2 p) const;

  const std::vector<Vec2> &points() const { return points_; }
  const std::vector<Tri> &triangles() const { return tris_; }
  bool is_super(int v) const { return v < super_vertices; }

private:
  std::vector<Vec2> points_;
  std::vector<Tri> tris_;
  int last_ = 0;

  // Scratch buffers reused across insertions.
  std::vector<int> cavity_;
  std::vector<int> stamp_;
  int stamp_counter_ = 0;
};

} // namespace serrin::detail
