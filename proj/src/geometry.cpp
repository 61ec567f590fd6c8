#include "serrin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "serrin/error.hpp"

namespace serrin {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;
constexpr double param_tol = 1e-10;
constexpr double quad_tol = 1e-10;

[[noreturn]] void reject(const std::string &what) { throw ValidationError(what); }

double polygon_signed_area(const std::vector<Vec2> &v) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    s += cross(v[i], v[(i + 1) % v.size()]);
  return 0.5 * s;
}

bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

} // namespace

const char *to_string(ShapeKind kind) {
  switch (kind) {
  case ShapeKind::none:
    return "none";
  case ShapeKind::disk:
    return "disk";
  case ShapeKind::ellipse:
    return "ellipse";
  case ShapeKind::star:
    return "star";
  case ShapeKind::polygon:
    return "polygon";
  }
  return "none";
}

ShapeKind shape_kind_from_string(const std::string &name) {
  if (name == "none")
    return ShapeKind::none;
  if (name == "disk")
    return ShapeKind::disk;
  if (name == "ellipse")
    return ShapeKind::ellipse;
  if (name == "star")
    return ShapeKind::star;
  if (name == "polygon")
    return ShapeKind::polygon;
  reject("kind: unknown shape '" + name + "'");
}

double wrap_parameter(double t) {
  double w = std::fmod(t, two_pi);
  if (w < 0)
    w += two_pi;
  if (w >= two_pi)
    w = 0.0;
  return w;
}

// ---------------------------------------------------------------------------
// Specs

DomainSpec DomainSpec::disk(double radius, Vec2 center) {
  DomainSpec s;
  s.kind = ShapeKind::disk;
  s.radius = radius;
  s.center = center;
  return s;
}

DomainSpec DomainSpec::ellipse(double a, double b, Vec2 center) {
  DomainSpec s;
  s.kind = ShapeKind::ellipse;
  s.a = a;
  s.b = b;
  s.center = center;
  return s;
}

DomainSpec DomainSpec::star(double r0, double epsilon, int mode, Vec2 center) {
  DomainSpec s;
  s.kind = ShapeKind::star;
  s.r0 = r0;
  s.epsilon = epsilon;
  s.mode = mode;
  s.center = center;
  return s;
}

DomainSpec DomainSpec::polygon(std::vector<Vec2> vertices) {
  DomainSpec s;
  s.kind = ShapeKind::polygon;
  s.vertices = std::move(vertices);
  return s;
}

void DomainSpec::validate() const {
  if (boundary_samples < 64 || boundary_samples % 2 != 0)
    reject("boundary_samples: must be even and at least 64");
  switch (kind) {
  case ShapeKind::none:
    reject("domain.kind: a domain cannot be 'none'");
  case ShapeKind::disk:
    if (!(radius > 0))
      reject("domain.radius: must be positive");
    break;
  case ShapeKind::ellipse:
    if (!(b > 0) || !(a >= b))
      reject("domain: ellipse requires a >= b > 0");
    break;
  case ShapeKind::star:
    if (!(r0 > 0))
      reject("domain.r0: must be positive");
    if (!(epsilon >= 0) || !(epsilon < 1))
      reject("domain.epsilon: must lie in [0, 1)");
    if (mode < 0)
      reject("domain.mode: must be nonnegative");
    break;
  case ShapeKind::polygon: {
    if (vertices.size() < 3)
      reject("domain.vertices: a polygon needs at least 3 vertices");
    if (!(polygon_signed_area(vertices) > 0))
      reject("domain.vertices: polygon must be counterclockwise with positive area");
    const std::size_t n = vertices.size();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1)
          continue;
        if (segments_cross(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
          reject("domain.vertices: polygon is not simple");
      }
    break;
  }
  }
}

InclusionSpec InclusionSpec::none() { return {}; }

InclusionSpec InclusionSpec::disk(double radius, Vec2 center) {
  InclusionSpec s;
  s.kind = ShapeKind::disk;
  s.radius = radius;
  s.center = center;
  return s;
}

InclusionSpec InclusionSpec::ellipse(double a, double b, Vec2 center) {
  InclusionSpec s;
  s.kind = ShapeKind::ellipse;
  s.a = a;
  s.b = b;
  s.center = center;
  return s;
}

void InclusionSpec::validate() const {
  switch (kind) {
  case ShapeKind::none:
    return;
  case ShapeKind::disk:
    if (!(radius > 0))
      reject("inclusion.radius: must be positive");
    return;
  case ShapeKind::ellipse:
    if (!(a > 0) || !(b > 0))
      reject("inclusion: ellipse semi-axes must be positive");
    return;
  default:
    reject(std::string("inclusion.kind: unsupported inclusion kind '") + to_string(kind) + "'");
  }
}

double inclusion_area(const InclusionSpec &inclusion) {
  switch (inclusion.kind) {
  case ShapeKind::disk:
    return std::numbers::pi * inclusion.radius * inclusion.radius;
  case ShapeKind::ellipse:
    return std::numbers::pi * inclusion.a * inclusion.b;
  default:
    return 0.0;
  }
}

// ---------------------------------------------------------------------------
// Curve

Curve::Curve(const DomainSpec &spec) : kind_(spec.kind), center_(spec.center) {
  spec.validate();
  radius_ = spec.radius;
  a_ = spec.a;
  b_ = spec.b;
  r0_ = spec.r0;
  eps_ = spec.epsilon;
  mode_ = spec.mode;
  if (kind_ == ShapeKind::polygon) {
    vertices_ = spec.vertices;
    const std::size_t n = vertices_.size();
    std::vector<double> cumulative(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      cumulative[i + 1] = cumulative[i] + distance(vertices_[i], vertices_[(i + 1) % n]);
    polygon_length_ = cumulative[n];
    corner_params_.resize(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      corner_params_[i] = two_pi * cumulative[i] / polygon_length_;
    corner_params_[n] = two_pi;
    Vec2 c{};
    for (const auto &v : vertices_)
      c += v;
    center_ = c / static_cast<double>(n);
  }
}

Curve::Curve(const InclusionSpec &spec) : kind_(spec.kind), center_(spec.center) {
  spec.validate();
  if (spec.empty())
    reject("inclusion: 'none' has no boundary curve");
  radius_ = spec.radius;
  a_ = spec.a;
  b_ = spec.b;
}

std::size_t Curve::polygon_edge(double t) const {
  const auto it = std::upper_bound(corner_params_.begin(), corner_params_.end(), t);
  const auto idx = static_cast<std::size_t>(std::distance(corner_params_.begin(), it));
  return std::min(idx == 0 ? 0 : idx - 1, vertices_.size() - 1);
}

Vec2 Curve::point(double t) const {
  switch (kind_) {
  case ShapeKind::disk:
    return center_ + radius_ * Vec2{std::cos(t), std::sin(t)};
  case ShapeKind::ellipse:
    return center_ + Vec2{a_ * std::cos(t), b_ * std::sin(t)};
  case ShapeKind::star: {
    const double r = r0_ * (1.0 + eps_ * std::cos(mode_ * t));
    return center_ + r * Vec2{std::cos(t), std::sin(t)};
  }
  case ShapeKind::polygon: {
    t = wrap_parameter(t);
    const std::size_t e = polygon_edge(t);
    const double s = (t - corner_params_[e]) / (corner_params_[e + 1] - corner_params_[e]);
    const Vec2 p = vertices_[e];
    const Vec2 q = vertices_[(e + 1) % vertices_.size()];
    // Exact corners for exact parameters.
    if (s <= 0.0)
      return p;
    return p + s * (q - p);
  }
  case ShapeKind::none:
    break;
  }
  return center_;
}

Vec2 Curve::derivative(double t) const {
  switch (kind_) {
  case ShapeKind::disk:
    return radius_ * Vec2{-std::sin(t), std::cos(t)};
  case ShapeKind::ellipse:
    return {-a_ * std::sin(t), b_ * std::cos(t)};
  case ShapeKind::star: {
    const double r = r0_ * (1.0 + eps_ * std::cos(mode_ * t));
    const double dr = -r0_ * eps_ * mode_ * std::sin(mode_ * t);
    const Vec2 radial{std::cos(t), std::sin(t)};
    return dr * radial + r * perp(radial);
  }
  case ShapeKind::polygon: {
    t = wrap_parameter(t);
    const std::size_t e = polygon_edge(t);
    const Vec2 p = vertices_[e];
    const Vec2 q = vertices_[(e + 1) % vertices_.size()];
    return (q - p) / (corner_params_[e + 1] - corner_params_[e]);
  }
  case ShapeKind::none:
    break;
  }
  return {};
}

Vec2 Curve::second_derivative(double t) const {
  switch (kind_) {
  case ShapeKind::disk:
    return -radius_ * Vec2{std::cos(t), std::sin(t)};
  case ShapeKind::ellipse:
    return {-a_ * std::cos(t), -b_ * std::sin(t)};
  case ShapeKind::star: {
    const double k = mode_;
    const double r = r0_ * (1.0 + eps_ * std::cos(k * t));
    const double dr = -r0_ * eps_ * k * std::sin(k * t);
    const double ddr = -r0_ * eps_ * k * k * std::cos(k * t);
    const Vec2 radial{std::cos(t), std::sin(t)};
    return (ddr - r) * radial + 2.0 * dr * perp(radial);
  }
  default:
    return {};
  }
}

Vec2 Curve::outward_normal(double t) const {
  const Vec2 d = derivative(t);
  return Vec2{d.y, -d.x} / norm(d);
}

double Curve::curvature(double t) const {
  const Vec2 d = derivative(t);
  const Vec2 dd = second_derivative(t);
  const double speed = norm(d);
  return cross(d, dd) / (speed * speed * speed);
}

bool Curve::contains(Vec2 p) const {
  const Vec2 q = p - center_;
  switch (kind_) {
  case ShapeKind::disk:
    return norm2(q) < radius_ * radius_;
  case ShapeKind::ellipse:
    return (q.x * q.x) / (a_ * a_) + (q.y * q.y) / (b_ * b_) < 1.0;
  case ShapeKind::star: {
    const double theta = std::atan2(q.y, q.x);
    const double r = r0_ * (1.0 + eps_ * std::cos(mode_ * theta));
    return norm(q) < r;
  }
  case ShapeKind::polygon: {
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2 vi = vertices_[i];
      const Vec2 vj = vertices_[j];
      if ((vi.y > p.y) != (vj.y > p.y) && p.x < (vj.x - vi.x) * (p.y - vi.y) / (vj.y - vi.y) + vi.x)
        inside = !inside;
    }
    return inside;
  }
  case ShapeKind::none:
    break;
  }
  return false;
}

std::vector<double> Curve::sample_parameters(int n) const {
  std::vector<double> ts;
  if (kind_ != ShapeKind::polygon || n < static_cast<int>(vertices_.size())) {
    ts.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      ts.push_back(two_pi * i / n);
    return ts;
  }
  // Per edge, proportional to length, corners included.
  const std::size_t m = vertices_.size();
  for (std::size_t e = 0; e < m; ++e) {
    const double span = corner_params_[e + 1] - corner_params_[e];
    const int pieces = std::max(1, static_cast<int>(std::lround(n * span / two_pi)));
    for (int k = 0; k < pieces; ++k)
      ts.push_back(corner_params_[e] + span * k / pieces);
  }
  return ts;
}

double Curve::mid_parameter(double t0, double t1) const {
  double span = t1 - t0;
  if (span < 0)
    span += two_pi;
  return wrap_parameter(t0 + 0.5 * span);
}

double Curve::area() const {
  switch (kind_) {
  case ShapeKind::disk:
    return std::numbers::pi * radius_ * radius_;
  case ShapeKind::ellipse:
    return std::numbers::pi * a_ * b_;
  case ShapeKind::star:
    return 0.5 * adaptive_simpson(
                     [&](double t) {
                       const double r = r0_ * (1.0 + eps_ * std::cos(mode_ * t));
                       return r * r;
                     },
                     0.0, two_pi, quad_tol);
  case ShapeKind::polygon:
    return polygon_signed_area(vertices_);
  case ShapeKind::none:
    break;
  }
  return 0.0;
}

double Curve::perimeter() const {
  switch (kind_) {
  case ShapeKind::disk:
    return two_pi * radius_;
  case ShapeKind::polygon:
    return polygon_length_;
  case ShapeKind::none:
    return 0.0;
  default:
    return adaptive_simpson([&](double t) { return norm(derivative(t)); }, 0.0, two_pi, quad_tol);
  }
}

double Curve::diameter() const {
  switch (kind_) {
  case ShapeKind::disk:
    return 2.0 * radius_;
  case ShapeKind::ellipse:
    return 2.0 * std::max(a_, b_);
  default:
    break;
  }
  constexpr int n = 1024;
  const auto ts = sample_parameters(n);
  std::vector<Vec2> pts;
  pts.reserve(ts.size());
  for (double t : ts)
    pts.push_back(point(t));
  double best = 0.0;
  std::size_t bi = 0, bj = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = norm2(pts[i] - pts[j]);
      if (d > best) {
        best = d;
        bi = i;
        bj = j;
      }
    }
  if (kind_ == ShapeKind::polygon)
    return std::sqrt(best);
  // Alternating refinement of the two endpoints.
  double ti = ts[bi], tj = ts[bj];
  const double h = two_pi / n;
  for (int sweep = 0; sweep < 4; ++sweep) {
    const Vec2 pj = point(tj);
    ti = golden_minimize([&](double t) { return -norm2(point(t) - pj); }, ti - h, ti + h,
                         param_tol);
    const Vec2 pi = point(ti);
    tj = golden_minimize([&](double t) { return -norm2(point(t) - pi); }, tj - h, tj + h,
                         param_tol);
  }
  return std::max(std::sqrt(best), distance(point(ti), point(tj)));
}

double Curve::max_curvature() const {
  switch (kind_) {
  case ShapeKind::disk:
    return 1.0 / radius_;
  case ShapeKind::ellipse:
    return std::max(a_, b_) / (std::min(a_, b_) * std::min(a_, b_));
  case ShapeKind::polygon:
    return std::numeric_limits<double>::infinity();
  default:
    break;
  }
  double best = 0.0;
  for (int i = 0; i < 4096; ++i)
    best = std::max(best, std::abs(curvature(two_pi * i / 4096)));
  return best;
}

CurveDistance Curve::closest(Vec2 p, int samples) const {
  const auto ts = sample_parameters(samples);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double d = norm2(point(ts[i]) - p);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  const std::size_t n = ts.size();
  double lo = ts[(best + n - 1) % n];
  double hi = ts[(best + 1) % n];
  if (lo > ts[best])
    lo -= two_pi;
  if (hi < ts[best])
    hi += two_pi;
  double t = golden_minimize([&](double s) { return norm2(point(s) - p); }, lo, hi, param_tol);
  // Golden section is only as good as its bracket; keep the sample if it wins.
  if (norm2(point(t) - p) > best_d)
    t = ts[best];
  t = wrap_parameter(t);
  return {distance(point(t), p), t, point(t)};
}

CurveDistance Curve::farthest(Vec2 p, int samples) const {
  const auto ts = sample_parameters(samples);
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double d = norm2(point(ts[i]) - p);
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  const std::size_t n = ts.size();
  double lo = ts[(best + n - 1) % n];
  double hi = ts[(best + 1) % n];
  if (lo > ts[best])
    lo -= two_pi;
  if (hi < ts[best])
    hi += two_pi;
  double t = golden_minimize([&](double s) { return -norm2(point(s) - p); }, lo, hi, param_tol);
  if (norm2(point(t) - p) < best_d)
    t = ts[best];
  t = wrap_parameter(t);
  return {distance(point(t), p), t, point(t)};
}

// ---------------------------------------------------------------------------
// Polygonal carrier

double PolygonalBoundary::signed_area() const { return polygon_signed_area(vertices); }

void PolygonalBoundary::validate() const {
  if (vertices.size() < 3)
    reject("polygon: fewer than 3 vertices");
  if (!(signed_area() > 0))
    reject("polygon: must be counterclockwise with positive area");
  for (const auto &n : normals)
    if (std::abs(norm(n) - 1.0) > 1e-12)
      reject("polygon: normal is not unit length");
}

namespace {

PolygonalBoundary carrier(std::vector<Vec2> vertices, std::vector<double> params) {
  PolygonalBoundary poly;
  const std::size_t n = vertices.size();
  poly.weights.assign(n, 0.0);
  poly.normals.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p = vertices[i];
    const Vec2 q = vertices[(i + 1) % n];
    const Vec2 e = q - p;
    const double len = norm(e);
    poly.normals[i] = Vec2{e.y, -e.x} / len;
    poly.weights[i] += 0.5 * len;
    poly.weights[(i + 1) % n] += 0.5 * len;
  }
  poly.vertices = std::move(vertices);
  poly.params = std::move(params);
  return poly;
}

} // namespace

PolygonalBoundary polygonize(const DomainSpec &spec, int n) {
  if (n < 4)
    reject("polygonize: need at least 4 vertices");
  const Curve curve(spec);
  auto ts = curve.sample_parameters(n);
  std::vector<Vec2> pts;
  pts.reserve(ts.size());
  for (double t : ts)
    pts.push_back(curve.point(t));
  auto poly = carrier(std::move(pts), std::move(ts));
  poly.validate();
  return poly;
}

PolygonalBoundary polygon_from_vertices(const std::vector<Vec2> &vertices) {
  if (vertices.size() < 3)
    reject("polygon: fewer than 3 vertices");
  std::vector<double> params(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i)
    params[i] = two_pi * static_cast<double>(i) / static_cast<double>(vertices.size());
  auto poly = carrier(vertices, std::move(params));
  poly.validate();
  return poly;
}

AreaPerimeter area_perimeter(const PolygonalBoundary &poly) {
  double perimeter = 0.0;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i)
    perimeter += distance(poly.vertices[i], poly.vertices[(i + 1) % n]);
  return {poly.signed_area(), perimeter};
}

AreaPerimeter exact_area_perimeter(const DomainSpec &spec) {
  const Curve curve(spec);
  return {curve.area(), curve.perimeter()};
}

double serrin_constant(double area, double perimeter) {
  if (!(area > 0) || !(perimeter > 0))
    reject("serrin_constant: area and perimeter must be positive");
  return -area / perimeter;
}

RhoBounds rho_bounds(const DomainSpec &spec, Vec2 z) {
  const Curve curve(spec);
  if (!curve.contains(z)) {
    std::ostringstream msg;
    msg << "rho_bounds: point (" << z.x << ", " << z.y << ") is not strictly inside the domain";
    reject(msg.str());
  }
  const int samples = std::max(spec.boundary_samples, 1024);
  const double ri = curve.closest(z, samples).distance;
  const double re = curve.farthest(z, samples).distance;
  if (!(ri > 0))
    reject("rho_bounds: point lies on the boundary");
  return {ri, std::max(ri, re)};
}

InclusionMargin inclusion_margin(const DomainSpec &domain, const InclusionSpec &inclusion) {
  domain.validate();
  inclusion.validate();
  if (inclusion.empty())
    return {};
  const Curve outer(domain);
  const Curve inner(inclusion);
  constexpr int inner_samples = 512;
  const int outer_samples = std::max(domain.boundary_samples, 1024);
  const auto ts = inner.sample_parameters(inner_samples);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Vec2 p = inner.point(ts[i]);
    if (!outer.contains(p))
      reject("inclusion: D is not contained in the domain");
    const double d = outer.closest(p, outer_samples).distance;
    if (d < best) {
      best = d;
      best_i = i;
    }
  }
  for (double t : outer.sample_parameters(inner_samples))
    if (inner.contains(outer.point(t)))
      reject("inclusion: D is not contained in the domain");
  const double h = two_pi / inner_samples;
  const double t_star = golden_minimize(
      [&](double t) { return outer.closest(inner.point(t), outer_samples).distance; },
      ts[best_i] - h, ts[best_i] + h, param_tol);
  best = std::min(best, outer.closest(inner.point(t_star), outer_samples).distance);
  if (!(best > 1e-12))
    reject("inclusion: D touches the domain boundary (margin <= 0)");
  return {best, std::max(1.0, 1.0 / best)};
}

} // namespace serrin
