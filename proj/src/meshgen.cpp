#include "serrin/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "delaunay.hpp"
#include "serrin/error.hpp"

namespace serrin {

std::uint64_t next_mesh_id() {
  static std::atomic<std::uint64_t> counter{0};
  return ++counter;
}

namespace {

constexpr double rad_to_deg = 180.0 / std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double min_angle(Vec2 a, Vec2 b, Vec2 c) {
  const double la = norm2(b - c), lb = norm2(c - a), lc = norm2(a - b);
  // Smallest angle is opposite the shortest edge.
  double s2, o1, o2;
  if (la <= lb && la <= lc) {
    s2 = la;
    o1 = lb;
    o2 = lc;
  } else if (lb <= lc) {
    s2 = lb;
    o1 = la;
    o2 = lc;
  } else {
    s2 = lc;
    o1 = la;
    o2 = lb;
  }
  const double cosine = (o1 + o2 - s2) / (2.0 * std::sqrt(o1 * o2));
  return std::acos(std::clamp(cosine, -1.0, 1.0)) * rad_to_deg;
}

/// Uniform bucket grid over the mesh bounding box.
class BucketGrid {
public:
  BucketGrid(Vec2 lo, Vec2 hi, double cell) : lo_(lo), cell_(cell) {
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell)) + 1);
    buckets_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
  }

  void add(int id, Vec2 lo, Vec2 hi) {
    const auto [i0, j0] = cell_of(lo);
    const auto [i1, j1] = cell_of(hi);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        buckets_[index(i, j)].push_back(id);
  }

  template <class F> void visit(Vec2 lo, Vec2 hi, F &&f) const {
    const auto [i0, j0] = cell_of(lo);
    const auto [i1, j1] = cell_of(hi);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        for (int id : buckets_[index(i, j)])
          f(id);
  }

private:
  Vec2 lo_;
  double cell_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;

  std::pair<int, int> cell_of(Vec2 p) const {
    const int i = std::clamp(static_cast<int>(std::floor((p.x - lo_.x) / cell_)), 0, nx_ - 1);
    const int j = std::clamp(static_cast<int>(std::floor((p.y - lo_.y) / cell_)), 0, ny_ - 1);
    return {i, j};
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }
};

struct Segment {
  int a = 0;
  int b = 0;
  CurveTag curve = CurveTag::boundary;
  double ta = 0.0;
  double tb = 0.0;
  bool alive = true;
};

/// Conforming Delaunay refinement: every constraint segment is kept free
/// of encroaching vertices (hence a Delaunay edge), skinny or oversized
/// triangles are split at their circumcentres.
class Refiner {
public:
  Refiner(const DomainSpec &domain, const InclusionSpec &inclusion, double target_h,
          const MeshOptions &options)
      : domain_(domain), inclusion_(inclusion), outer_(domain), h_(target_h), options_(options),
        lo_(bbox_lo()), hi_(bbox_hi()), tri_(lo_, hi_), vertex_grid_(lo_, hi_, target_h),
        segment_grid_(lo_, hi_, target_h) {
    if (!inclusion.empty())
      inner_.emplace(inclusion);
  }

  Mesh run();

private:
  const DomainSpec &domain_;
  const InclusionSpec &inclusion_;
  Curve outer_;
  std::optional<Curve> inner_;
  double h_;
  MeshOptions options_;
  Vec2 lo_, hi_;
  detail::DelaunayTriangulation tri_;
  BucketGrid vertex_grid_;
  BucketGrid segment_grid_;

  std::vector<CurveTag> tag_{CurveTag::interior, CurveTag::interior, CurveTag::interior};
  std::vector<double> param_{0.0, 0.0, 0.0};
  std::vector<Segment> segments_;
  std::deque<int> split_queue_;

  Vec2 bbox_lo() const {
    const auto pts = polygonize_points();
    Vec2 lo = pts.front();
    for (auto p : pts)
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    return lo - Vec2{h_, h_};
  }
  Vec2 bbox_hi() const {
    const auto pts = polygonize_points();
    Vec2 hi = pts.front();
    for (auto p : pts)
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    return hi + Vec2{h_, h_};
  }
  std::vector<Vec2> polygonize_points() const {
    std::vector<Vec2> pts;
    for (double t : outer_.sample_parameters(1024))
      pts.push_back(outer_.point(t));
    return pts;
  }

  const Curve &curve(CurveTag tag) const { return tag == CurveTag::interface ? *inner_ : outer_; }

  int add_vertex(Vec2 p, CurveTag tag, double param) {
    const int id = tri_.insert(p);
    if (id < 0)
      return -1;
    tag_.push_back(tag);
    param_.push_back(param);
    vertex_grid_.add(id, p, p);
    if (tri_.points().size() > options_.max_vertices)
      throw MeshQualityError("mesh generation exceeded the vertex budget of " +
                             std::to_string(options_.max_vertices));
    return id;
  }

  int add_segment(int a, int b, CurveTag curve, double ta, double tb) {
    const int id = static_cast<int>(segments_.size());
    segments_.push_back({a, b, curve, ta, tb, true});
    const Vec2 pa = tri_.points()[static_cast<std::size_t>(a)];
    const Vec2 pb = tri_.points()[static_cast<std::size_t>(b)];
    const Vec2 mid = 0.5 * (pa + pb);
    const double r = 0.5 * distance(pa, pb);
    segment_grid_.add(id, mid - Vec2{r, r}, mid + Vec2{r, r});
    return id;
  }

  static bool in_diametral_circle(Vec2 a, Vec2 b, Vec2 p) { return dot(a - p, b - p) < 0.0; }

  bool encroached(int s) const {
    const Segment &seg = segments_[static_cast<std::size_t>(s)];
    const Vec2 a = tri_.points()[static_cast<std::size_t>(seg.a)];
    const Vec2 b = tri_.points()[static_cast<std::size_t>(seg.b)];
    const Vec2 mid = 0.5 * (a + b);
    const double r = 0.5 * distance(a, b);
    bool hit = false;
    vertex_grid_.visit(mid - Vec2{r, r}, mid + Vec2{r, r}, [&](int v) {
      if (hit || v == seg.a || v == seg.b)
        return;
      if (in_diametral_circle(a, b, tri_.points()[static_cast<std::size_t>(v)]))
        hit = true;
    });
    return hit;
  }

  std::vector<int> segments_encroached_by(Vec2 p) const {
    std::vector<int> out;
    segment_grid_.visit(p, p, [&](int s) {
      const Segment &seg = segments_[static_cast<std::size_t>(s)];
      if (!seg.alive)
        return;
      if (in_diametral_circle(tri_.points()[static_cast<std::size_t>(seg.a)],
                              tri_.points()[static_cast<std::size_t>(seg.b)], p))
        out.push_back(s);
    });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  void split_segment(int s) {
    Segment seg = segments_[static_cast<std::size_t>(s)];
    if (!seg.alive)
      return;
    const Curve &c = curve(seg.curve);
    const double tm = c.mid_parameter(seg.ta, seg.tb);
    const Vec2 m = c.point(tm);
    segments_[static_cast<std::size_t>(s)].alive = false;
    const int mid = add_vertex(m, seg.curve, tm);
    if (mid < 0)
      throw MeshQualityError("mesh generation: segment split produced a duplicate vertex");
    split_queue_.push_back(add_segment(seg.a, mid, seg.curve, seg.ta, tm));
    split_queue_.push_back(add_segment(mid, seg.b, seg.curve, tm, seg.tb));
    for (int other : segments_encroached_by(m))
      split_queue_.push_back(other);
  }

  void drain_split_queue() {
    while (!split_queue_.empty()) {
      const int s = split_queue_.front();
      split_queue_.pop_front();
      if (segments_[static_cast<std::size_t>(s)].alive && encroached(s))
        split_segment(s);
    }
  }

  void add_curve(CurveTag tag, int min_points) {
    const Curve &c = curve(tag);
    int n = std::max(min_points, static_cast<int>(std::ceil(c.perimeter() / h_)));
    n += n % 2;
    const auto ts = c.sample_parameters(n);
    std::vector<int> ids;
    for (double t : ts) {
      const int id = add_vertex(c.point(t), tag, t);
      if (id < 0)
        throw MeshQualityError("mesh generation: coincident curve samples");
      ids.push_back(id);
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      const std::size_t j = (i + 1) % ids.size();
      split_queue_.push_back(add_segment(ids[i], ids[j], tag, ts[i], ts[j]));
    }
  }

  void add_lattice() {
    // Equilateral lattice anchored at the domain centre.
    const Vec2 origin = outer_.center();
    const double dy = h_ * std::sqrt(3.0) / 2.0;
    const int j0 = static_cast<int>(std::floor((lo_.y - origin.y) / dy));
    const int j1 = static_cast<int>(std::ceil((hi_.y - origin.y) / dy));
    const int i0 = static_cast<int>(std::floor((lo_.x - origin.x) / h_)) - 1;
    const int i1 = static_cast<int>(std::ceil((hi_.x - origin.x) / h_)) + 1;
    const double clearance = 0.6 * h_;
    // Leaves room for the offset layer along the outer boundary.
    const double boundary_clearance = (0.5 * std::sqrt(3.0) + 0.6) * h_;
    for (int j = j0; j <= j1; ++j) {
      const double shift = (j % 2 != 0) ? 0.5 * h_ : 0.0;
      for (int i = i0; i <= i1; ++i) {
        const Vec2 p = origin + Vec2{i * h_ + shift, j * dy};
        if (!outer_.contains(p))
          continue;
        if (outer_.closest(p, 256).distance < boundary_clearance)
          continue;
        if (inner_ && inner_->closest(p, 256).distance < clearance)
          continue;
        add_vertex(p, CurveTag::interior, 0.0);
      }
    }
  }

  /// One row of points offset inward from the outer boundary samples, so
  /// boundary triangles are near-equilateral and uniform along the curve.
  void add_boundary_layer() {
    int n = std::max(16, static_cast<int>(std::ceil(outer_.perimeter() / h_)));
    n += n % 2;
    const auto ts = outer_.sample_parameters(n);
    for (std::size_t i = 0; i < ts.size(); ++i) {
      const double t0 = ts[i];
      const double t1 = ts[(i + 1) % ts.size()];
      const double length = distance(outer_.point(t0), outer_.point(t1));
      const double tm = outer_.mid_parameter(t0, t1);
      const double offset = 0.5 * std::sqrt(3.0) * length;
      if (offset * std::abs(outer_.curvature(tm)) > 0.5)
        continue;
      const Vec2 p = outer_.point(tm) - offset * outer_.outward_normal(tm);
      if (!outer_.contains(p) || outer_.closest(p, 256).distance < 0.6 * offset)
        continue;
      if (inner_ && inner_->closest(p, 256).distance < 0.6 * h_)
        continue;
      bool crowded = false;
      vertex_grid_.visit(p - Vec2{h_, h_}, p + Vec2{h_, h_}, [&](int v) {
        if (distance(tri_.points()[static_cast<std::size_t>(v)], p) < 0.6 * length)
          crowded = true;
      });
      if (!crowded)
        add_vertex(p, CurveTag::interior, 0.0);
    }
  }

  /// Flags triangles inside the outer boundary by flooding from the
  /// super-triangle across non-boundary edges.
  std::vector<char> classify_inside() const {
    std::unordered_set<std::uint64_t> boundary_edges;
    for (const auto &s : segments_)
      if (s.alive && s.curve == CurveTag::boundary)
        boundary_edges.insert(edge_key(s.a, s.b));
    const auto &tris = tri_.triangles();
    std::vector<char> outside(tris.size(), 0);
    std::vector<int> stack;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (!tris[t].alive)
        continue;
      for (int v : tris[t].v)
        if (tri_.is_super(v)) {
          outside[t] = 1;
          stack.push_back(static_cast<int>(t));
          break;
        }
    }
    while (!stack.empty()) {
      const auto t = static_cast<std::size_t>(stack.back());
      stack.pop_back();
      const auto &tr = tris[t];
      for (std::size_t i = 0; i < 3; ++i) {
        const int n = tr.nbr[i];
        if (n < 0 || outside[static_cast<std::size_t>(n)])
          continue;
        if (boundary_edges.count(edge_key(tr.v[(i + 1) % 3], tr.v[(i + 2) % 3])))
          continue;
        outside[static_cast<std::size_t>(n)] = 1;
        stack.push_back(n);
      }
    }
    std::vector<char> inside(tris.size(), 0);
    for (std::size_t t = 0; t < tris.size(); ++t)
      inside[t] = tris[t].alive && !outside[t];
    return inside;
  }

  bool is_bad(const detail::DelaunayTriangulation::Tri &t) const {
    const auto &p = tri_.points();
    const Vec2 a = p[static_cast<std::size_t>(t.v[0])];
    const Vec2 b = p[static_cast<std::size_t>(t.v[1])];
    const Vec2 c = p[static_cast<std::size_t>(t.v[2])];
    const double longest = std::sqrt(std::max({norm2(a - b), norm2(b - c), norm2(c - a)}));
    return longest > 1.4 * h_ || min_angle(a, b, c) < options_.min_angle_deg;
  }

  void refine_quality() {
    for (int pass = 0; pass < 500; ++pass) {
      const auto inside = classify_inside();
      const auto &tris = tri_.triangles();
      std::vector<std::array<int, 3>> bad;
      for (std::size_t t = 0; t < tris.size(); ++t)
        if (inside[t] && is_bad(tris[t]))
          bad.push_back(tris[t].v);
      if (bad.empty())
        return;
      std::size_t progress = 0;
      for (const auto &v : bad) {
        const auto &p = tri_.points();
        const Vec2 a = p[static_cast<std::size_t>(v[0])];
        const Vec2 b = p[static_cast<std::size_t>(v[1])];
        const Vec2 c = p[static_cast<std::size_t>(v[2])];
        // Skip triangles destroyed earlier in this pass.
        const int t = tri_.locate((a + b + c) / 3.0);
        const auto &cur = tri_.triangles()[static_cast<std::size_t>(t)].v;
        if (!std::is_permutation(cur.begin(), cur.end(), v.begin()))
          continue;
        const Vec2 cc = detail::circumcenter(a, b, c);
        const auto hits = segments_encroached_by(cc);
        if (!hits.empty()) {
          for (int s : hits) {
            split_queue_.push_back(s);
          }
          const std::size_t before = tri_.points().size();
          drain_split_queue();
          progress += tri_.points().size() - before;
          continue;
        }
        if (!outer_.contains(cc))
          continue;
        if (add_vertex(cc, CurveTag::interior, 0.0) >= 0) {
          ++progress;
          for (int s : segments_encroached_by(cc))
            split_queue_.push_back(s);
          drain_split_queue();
        }
      }
      if (progress == 0)
        return;
    }
  }

  Mesh assemble();
};

Mesh Refiner::run() {
  add_lattice();
  add_boundary_layer();
  add_curve(CurveTag::boundary, 16);
  if (inner_)
    add_curve(CurveTag::interface, 24);
  drain_split_queue();
  refine_quality();
  return assemble();
}

Mesh Refiner::assemble() {
  const auto inside = classify_inside();
  const auto &tris = tri_.triangles();
  const auto &pts = tri_.points();
  constexpr int offset = detail::DelaunayTriangulation::super_vertices;

  Mesh mesh;
  mesh.id = next_mesh_id();
  mesh.domain = domain_;
  mesh.inclusion = inclusion_;
  for (std::size_t v = offset; v < pts.size(); ++v) {
    mesh.vertices.push_back(pts[v]);
    mesh.vertex_tag.push_back(tag_[v]);
    mesh.vertex_param.push_back(param_[v]);
  }

  // Interface polygon for region tagging, ordered by curve parameter.
  std::vector<Segment> iface;
  for (const auto &s : segments_)
    if (s.alive && s.curve == CurveTag::interface)
      iface.push_back(s);
  std::sort(iface.begin(), iface.end(), [](const Segment &x, const Segment &y) { return x.ta < y.ta; });
  auto inside_interface = [&](Vec2 q) {
    bool in = false;
    for (const auto &s : iface) {
      const Vec2 vi = pts[static_cast<std::size_t>(s.a)];
      const Vec2 vj = pts[static_cast<std::size_t>(s.b)];
      if ((vi.y > q.y) != (vj.y > q.y) && q.x < (vj.x - vi.x) * (q.y - vi.y) / (vj.y - vi.y) + vi.x)
        in = !in;
    }
    return in;
  };

  for (std::size_t t = 0; t < tris.size(); ++t) {
    if (!inside[t])
      continue;
    Triangle out;
    for (std::size_t i = 0; i < 3; ++i) {
      if (tri_.is_super(tris[t].v[i]))
        throw MeshQualityError("mesh generation: interior triangle touches the super-triangle");
      out.v[i] = tris[t].v[i] - offset;
    }
    const Vec2 c = (pts[static_cast<std::size_t>(tris[t].v[0])] + pts[static_cast<std::size_t>(tris[t].v[1])] +
                    pts[static_cast<std::size_t>(tris[t].v[2])]) /
                   3.0;
    out.region = (!iface.empty() && inside_interface(c)) ? Region::inside_D : Region::outside_D;
    mesh.triangles.push_back(out);
  }

  std::vector<Segment> loop;
  for (const auto &s : segments_)
    if (s.alive && s.curve == CurveTag::boundary)
      loop.push_back(s);
  std::sort(loop.begin(), loop.end(), [](const Segment &x, const Segment &y) { return x.ta < y.ta; });
  for (const auto &s : loop) {
    const int a = s.a - offset;
    const int b = s.b - offset;
    const Vec2 e = mesh.vertices[static_cast<std::size_t>(b)] - mesh.vertices[static_cast<std::size_t>(a)];
    mesh.boundary_vertex_ids.push_back(a);
    mesh.boundary_edges.push_back({{a, b}, Vec2{e.y, -e.x} / norm(e)});
  }

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &v = mesh.triangles[t].v;
    for (std::size_t i = 0; i < 3; ++i)
      mesh.h_max = std::max(mesh.h_max, distance(mesh.vertices[static_cast<std::size_t>(v[i])],
                                                 mesh.vertices[static_cast<std::size_t>(v[(i + 1) % 3])]));
  }
  return mesh;
}

} // namespace

// ---------------------------------------------------------------------------
// Mesh

double Mesh::triangle_area(std::size_t t) const {
  const auto &v = triangles[t].v;
  const Vec2 a = vertices[static_cast<std::size_t>(v[0])];
  const Vec2 b = vertices[static_cast<std::size_t>(v[1])];
  const Vec2 c = vertices[static_cast<std::size_t>(v[2])];
  return 0.5 * cross(b - a, c - a);
}

Vec2 Mesh::centroid(std::size_t t) const {
  const auto &v = triangles[t].v;
  return (vertices[static_cast<std::size_t>(v[0])] + vertices[static_cast<std::size_t>(v[1])] +
          vertices[static_cast<std::size_t>(v[2])]) /
         3.0;
}

double Mesh::area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t)
    s += triangle_area(t);
  return s;
}

double Mesh::inclusion_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t)
    if (triangles[t].region == Region::inside_D)
      s += triangle_area(t);
  return s;
}

double Mesh::min_angle_degrees() const {
  double best = 180.0;
  for (const auto &t : triangles)
    best = std::min(best, min_angle(vertices[static_cast<std::size_t>(t.v[0])], vertices[static_cast<std::size_t>(t.v[1])],
                                    vertices[static_cast<std::size_t>(t.v[2])]));
  return best;
}

void Mesh::check_invariants(double min_angle_deg) const {
  auto fail = [](const std::string &what) { throw MeshQualityError("mesh invariant violated: " + what); };
  if (vertex_tag.size() != vertices.size() || vertex_param.size() != vertices.size())
    fail("per-vertex arrays out of sync");
  std::unordered_map<std::uint64_t, int> edge_use;
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    if (!(triangle_area(t) > 0))
      fail("triangle " + std::to_string(t) + " is not positively oriented");
    const auto &v = triangles[t].v;
    for (std::size_t i = 0; i < 3; ++i)
      ++edge_use[edge_key(v[i], v[(i + 1) % 3])];
  }
  std::size_t single = 0;
  for (const auto &[key, count] : edge_use) {
    if (count > 2)
      fail("edge shared by more than two triangles");
    if (count == 1)
      ++single;
  }
  if (single != boundary_edges.size())
    fail("hull edges do not match the boundary loop");
  for (std::size_t i = 0; i < boundary_edges.size(); ++i) {
    const auto &e = boundary_edges[i];
    if (edge_use.find(edge_key(e.v[0], e.v[1])) == edge_use.end())
      fail("boundary edge is not a mesh edge");
    if (e.v[1] != boundary_edges[(i + 1) % boundary_edges.size()].v[0])
      fail("boundary edges do not form a closed loop");
  }
  const long long euler = static_cast<long long>(vertices.size()) - static_cast<long long>(edge_use.size()) +
                          static_cast<long long>(triangles.size());
  if (euler != 1)
    fail("Euler characteristic " + std::to_string(euler) + " != 1");
  if (!inclusion.empty()) {
    const Curve inner(inclusion);
    for (std::size_t t = 0; t < triangles.size(); ++t) {
      const bool in = triangles[t].region == Region::inside_D;
      if (inner.contains(centroid(t)) != in)
        fail("region tag of triangle " + std::to_string(t) + " disagrees with its centroid");
      for (int v : triangles[t].v) {
        if (vertex_tag[static_cast<std::size_t>(v)] == CurveTag::interface)
          continue;
        if (inner.contains(vertices[static_cast<std::size_t>(v)]) != in)
          fail("triangle " + std::to_string(t) + " straddles the interface");
      }
    }
  }
  const double angle = min_angle_degrees();
  if (angle < min_angle_deg) {
    std::ostringstream msg;
    msg << "minimum angle " << angle << " deg below " << min_angle_deg;
    fail(msg.str());
  }
}

Mesh generate(const DomainSpec &domain, const InclusionSpec &inclusion, double target_h,
              const MeshOptions &options) {
  if (!(target_h > 0) || !std::isfinite(target_h))
    throw ValidationError("target_h: must be positive");
  domain.validate();
  inclusion.validate();
  const auto margin = inclusion_margin(domain, inclusion);
  (void)margin;
  Refiner refiner(domain, inclusion, target_h, options);
  Mesh mesh = refiner.run();
  const double angle = mesh.min_angle_degrees();
  if (angle < 20.0) {
    std::ostringstream msg;
    msg << "mesh quality unreachable: minimum angle " << angle << " deg after refinement ("
        << mesh.triangles.size() << " triangles, h_max " << mesh.h_max << ")";
    throw MeshQualityError(msg.str());
  }
  return mesh;
}

Mesh refine(const Mesh &mesh) {
  Mesh out;
  out.id = next_mesh_id();
  out.domain = mesh.domain;
  out.inclusion = mesh.inclusion;
  out.vertices = mesh.vertices;
  out.vertex_tag = mesh.vertex_tag;
  out.vertex_param = mesh.vertex_param;

  const Curve outer(mesh.domain);
  std::optional<Curve> inner;
  if (!mesh.inclusion.empty())
    inner.emplace(mesh.inclusion);

  // Edge -> owning triangles, to tell boundary and interface edges apart.
  std::unordered_map<std::uint64_t, std::array<int, 2>> owners;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &v = mesh.triangles[t].v;
    for (std::size_t i = 0; i < 3; ++i) {
      auto [it, fresh] = owners.try_emplace(edge_key(v[i], v[(i + 1) % 3]), std::array<int, 2>{static_cast<int>(t), -1});
      if (!fresh)
        it->second[1] = static_cast<int>(t);
    }
  }

  std::unordered_map<std::uint64_t, int> midpoint;
  auto mid = [&](std::size_t t, int a, int b) {
    const auto key = edge_key(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end())
      return it->second;
    const auto &own = owners.at(key);
    const Vec2 pa = mesh.vertices[static_cast<std::size_t>(a)];
    const Vec2 pb = mesh.vertices[static_cast<std::size_t>(b)];
    Vec2 p = 0.5 * (pa + pb);
    CurveTag tag = CurveTag::interior;
    double param = 0.0;
    const Region here = mesh.triangles[t].region;
    if (own[1] < 0) {
      // a -> b is counterclockwise along the outer boundary.
      tag = CurveTag::boundary;
      param = outer.mid_parameter(mesh.vertex_param[static_cast<std::size_t>(a)],
                                  mesh.vertex_param[static_cast<std::size_t>(b)]);
      p = outer.point(param);
    } else if (inner && mesh.triangles[static_cast<std::size_t>(own[0])].region !=
                            mesh.triangles[static_cast<std::size_t>(own[1])].region) {
      tag = CurveTag::interface;
      double ta = mesh.vertex_param[static_cast<std::size_t>(a)];
      double tb = mesh.vertex_param[static_cast<std::size_t>(b)];
      // Counterclockwise along dD as seen from the inside_D triangle.
      if (here != Region::inside_D)
        std::swap(ta, tb);
      param = inner->mid_parameter(ta, tb);
      p = inner->point(param);
    }
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
    out.vertex_tag.push_back(tag);
    out.vertex_param.push_back(param);
    midpoint.emplace(key, id);
    return id;
  };

  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto [a, b, c] = mesh.triangles[t].v;
    const int ab = mid(t, a, b);
    const int bc = mid(t, b, c);
    const int ca = mid(t, c, a);
    const Region r = mesh.triangles[t].region;
    out.triangles.push_back({{a, ab, ca}, r});
    out.triangles.push_back({{ab, b, bc}, r});
    out.triangles.push_back({{ca, bc, c}, r});
    out.triangles.push_back({{ab, bc, ca}, r});
  }

  for (const auto &e : mesh.boundary_edges) {
    const int m = midpoint.at(edge_key(e.v[0], e.v[1]));
    for (const auto &[p, q] : {std::pair{e.v[0], m}, std::pair{m, e.v[1]}}) {
      const Vec2 d = out.vertices[static_cast<std::size_t>(q)] - out.vertices[static_cast<std::size_t>(p)];
      out.boundary_vertex_ids.push_back(p);
      out.boundary_edges.push_back({{p, q}, Vec2{d.y, -d.x} / norm(d)});
    }
  }

  for (const auto &t : out.triangles)
    for (std::size_t i = 0; i < 3; ++i)
      out.h_max = std::max(out.h_max, distance(out.vertices[static_cast<std::size_t>(t.v[i])],
                                               out.vertices[static_cast<std::size_t>(t.v[(i + 1) % 3])]));
  return out;
}

void write_mesh(std::ostream &out, const Mesh &mesh) {
  char buf[128];
  out << "VERTICES " << mesh.vertices.size() << '\n';
  for (const auto &p : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", p.x, p.y);
    out << buf;
  }
  out << "TRIANGLES " << mesh.triangles.size() << '\n';
  for (const auto &t : mesh.triangles)
    out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << static_cast<int>(t.region) << '\n';
  out << "BOUNDARY_EDGES " << mesh.boundary_edges.size() << '\n';
  for (const auto &e : mesh.boundary_edges) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g %.17g\n", e.v[0], e.v[1], e.normal.x, e.normal.y);
    out << buf;
  }
}

} // namespace serrin
