#pragma once

// Parametric domains and inclusions, and the geometric quantities derived
// from them: area, perimeter, the Serrin constant c = -|Omega|/|dOmega|,
// the inner/outer radii about a point, and the inclusion margin.
//
// Every closed curve is parametrized by t in [0, 2pi), counterclockwise.
// The analytic curve is the source of truth; polygons are carriers for
// quadrature and meshing only.

#include <limits>
#include <string>
#include <vector>

#include "serrin/vec2.hpp"

namespace serrin {

enum class ShapeKind { none, disk, ellipse, star, polygon };

const char *to_string(ShapeKind kind);
ShapeKind shape_kind_from_string(const std::string &name);

struct DomainSpec {
  ShapeKind kind = ShapeKind::disk;
  Vec2 center{};
  double radius = 1.0;
  // Semi-axes, a along x.
  double a = 1.0;
  double b = 1.0;
  // Star: r(t) = r0 * (1 + epsilon * cos(mode * t)).
  double r0 = 1.0;
  double epsilon = 0.0;
  int mode = 0;
  // Explicit polygon, counterclockwise.
  std::vector<Vec2> vertices;
  int boundary_samples = 256;

  static DomainSpec disk(double radius, Vec2 center = {});
  static DomainSpec ellipse(double a, double b, Vec2 center = {});
  static DomainSpec star(double r0, double epsilon, int mode, Vec2 center = {});
  static DomainSpec polygon(std::vector<Vec2> vertices);

  /// Throws ValidationError on violated invariants.
  void validate() const;

  bool operator==(const DomainSpec &) const = default;
};

struct InclusionSpec {
  ShapeKind kind = ShapeKind::none;
  Vec2 center{};
  double radius = 0.0;
  double a = 0.0;
  double b = 0.0;

  static InclusionSpec none();
  static InclusionSpec disk(double radius, Vec2 center = {});
  static InclusionSpec ellipse(double a, double b, Vec2 center = {});

  bool empty() const { return kind == ShapeKind::none; }
  void validate() const;

  bool operator==(const InclusionSpec &) const = default;
};

/// Result of a refined extremal-distance search on a curve.
struct CurveDistance {
  double distance = 0.0;
  double parameter = 0.0;
  Vec2 point{};
};

/// Smooth (or piecewise-linear, for polygons) closed curve.
class Curve {
public:
  explicit Curve(const DomainSpec &spec);
  explicit Curve(const InclusionSpec &spec);

  ShapeKind kind() const { return kind_; }
  Vec2 center() const { return center_; }

  Vec2 point(double t) const;
  /// d point / dt.
  Vec2 derivative(double t) const;
  Vec2 second_derivative(double t) const;
  Vec2 outward_normal(double t) const;
  double curvature(double t) const;

  bool contains(Vec2 p) const;

  /// n parameters, equispaced in t. Polygon corners are always included
  /// when n is at least the corner count.
  std::vector<double> sample_parameters(int n) const;
  /// Parameter halfway along the arc from t0 to t1 (counterclockwise).
  double mid_parameter(double t0, double t1) const;

  double area() const;
  double perimeter() const;
  double diameter() const;
  double max_curvature() const;

  /// Minimum / maximum of |x(t) - p| over the curve: dense sampling with
  /// `samples` points, then golden-section refinement on the bracket.
  CurveDistance closest(Vec2 p, int samples = 1024) const;
  CurveDistance farthest(Vec2 p, int samples = 1024) const;

private:
  ShapeKind kind_;
  Vec2 center_;
  double radius_ = 0.0;
  double a_ = 0.0, b_ = 0.0;
  double r0_ = 0.0, eps_ = 0.0;
  int mode_ = 0;
  std::vector<Vec2> vertices_;
  std::vector<double> corner_params_; // polygon: t at each vertex
  double polygon_length_ = 0.0;

  std::size_t polygon_edge(double t) const;
};

/// Wraps t into [0, 2pi).
double wrap_parameter(double t);

struct PolygonalBoundary {
  std::vector<Vec2> vertices;   // closed loop, counterclockwise
  std::vector<double> params;   // curve parameter of each vertex
  std::vector<double> weights;  // half the adjacent edge lengths
  std::vector<Vec2> normals;    // outward unit normal of edge (i, i+1)

  double signed_area() const;
  void validate() const;
};

PolygonalBoundary polygonize(const DomainSpec &spec, int n);
/// Builds the carrier for an explicit vertex loop.
PolygonalBoundary polygon_from_vertices(const std::vector<Vec2> &vertices);

struct AreaPerimeter {
  double area = 0.0;
  double perimeter = 0.0;
};

/// Shoelace area and total edge length.
AreaPerimeter area_perimeter(const PolygonalBoundary &poly);
/// Accurate values from the parametric curve.
AreaPerimeter exact_area_perimeter(const DomainSpec &spec);

/// c = -area / perimeter.
double serrin_constant(double area, double perimeter);

struct RhoBounds {
  double rho_i = 0.0;
  double rho_e = 0.0;
};

/// Inner and outer radii about z, refined on the parametric curve.
RhoBounds rho_bounds(const DomainSpec &spec, Vec2 z);

struct InclusionMargin {
  double margin = std::numeric_limits<double>::infinity();
  /// max(1, 1/margin).
  double M = 1.0;
};

/// dist(D, dOmega). Throws ValidationError if D touches or leaves Omega.
InclusionMargin inclusion_margin(const DomainSpec &domain, const InclusionSpec &inclusion);

/// Inclusion area; 0 for none.
double inclusion_area(const InclusionSpec &inclusion);

/// Adaptive Simpson quadrature on [a, b].
template <class F> double adaptive_simpson(F &&f, double a, double b, double tol);

/// Golden-section minimization of f on [lo, hi].
template <class F> double golden_minimize(F &&f, double lo, double hi, double tol);

} // namespace serrin

#include "serrin/detail/quadrature.hpp"
