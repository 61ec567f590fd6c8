#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>

namespace serrin::detail {

namespace {

using Exact = boost::multiprecision::cpp_rational;

template <class T> int sign_of(const T &x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

int orient_exact(Vec2 a, Vec2 b, Vec2 c) {
  const Exact ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  const Exact det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx);
  return sign_of(det);
}

int incircle_exact(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const Exact adx = Exact(a.x) - Exact(d.x), ady = Exact(a.y) - Exact(d.y);
  const Exact bdx = Exact(b.x) - Exact(d.x), bdy = Exact(b.y) - Exact(d.y);
  const Exact cdx = Exact(c.x) - Exact(d.x), cdy = Exact(c.y) - Exact(d.y);
  const Exact alift = adx * adx + ady * ady;
  const Exact blift = bdx * bdx + bdy * bdy;
  const Exact clift = cdx * cdx + cdy * cdy;
  const Exact det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                    clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

} // namespace

// Floating-point filters with the static error bounds of Shewchuk's
// predicates; exact rational evaluation when the filter cannot decide.
int orient(Vec2 a, Vec2 b, Vec2 c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double bound = 3.3306690738754716e-16 * (std::abs(left) + std::abs(right));
  if (det > bound)
    return 1;
  if (-det > bound)
    return -1;
  return orient_exact(a, b, c);
}

int incircle(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bdxcdy = bdx * cdy, cdxbdy = cdx * bdy;
  const double cdxady = cdx * ady, adxcdy = adx * cdy;
  const double adxbdy = adx * bdy, bdxady = bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);
  const double permanent = (std::abs(bdxcdy) + std::abs(cdxbdy)) * alift +
                           (std::abs(cdxady) + std::abs(adxcdy)) * blift +
                           (std::abs(adxbdy) + std::abs(bdxady)) * clift;
  const double bound = 1.1102230246251577e-15 * permanent;
  if (det > bound)
    return 1;
  if (-det > bound)
    return -1;
  return incircle_exact(a, b, c, d);
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
  const Vec2 ab = b - a;
  const Vec2 ac = c - a;
  const double d = 2.0 * cross(ab, ac);
  const double ab2 = norm2(ab);
  const double ac2 = norm2(ac);
  return a + Vec2{(ac.y * ab2 - ab.y * ac2) / d, (ab.x * ac2 - ac.x * ab2) / d};
}

DelaunayTriangulation::DelaunayTriangulation(Vec2 lo, Vec2 hi) {
  const Vec2 mid = 0.5 * (lo + hi);
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, 1e-3});
  const double r = 20.0 * extent;
  for (int k = 0; k < 3; ++k) {
    const double angle = std::numbers::pi / 2 + 2.0 * std::numbers::pi * k / 3.0;
    points_.push_back(mid + r * Vec2{std::cos(angle), std::sin(angle)});
  }
  tris_.push_back(Tri{{0, 1, 2}, {-1, -1, -1}, true});
}

int DelaunayTriangulation::locate(Vec2 p) const {
  int t = last_;
  if (t < 0 || t >= static_cast<int>(tris_.size()) || !tris_[static_cast<std::size_t>(t)].alive) {
    t = static_cast<int>(tris_.size()) - 1;
    while (t > 0 && !tris_[static_cast<std::size_t>(t)].alive)
      --t;
  }
  unsigned rotation = 0;
  const std::size_t max_steps = 4 * tris_.size() + 16;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const Tri &tri = tris_[static_cast<std::size_t>(t)];
    int next = -1;
    for (int k = 0; k < 3; ++k) {
      const int i = static_cast<int>((rotation + static_cast<unsigned>(k)) % 3);
      const Vec2 e0 = points_[static_cast<std::size_t>(tri.v[static_cast<std::size_t>((i + 1) % 3)])];
      const Vec2 e1 = points_[static_cast<std::size_t>(tri.v[static_cast<std::size_t>((i + 2) % 3)])];
      if (orient(e0, e1, p) < 0) {
        next = tri.nbr[static_cast<std::size_t>(i)];
        break;
      }
    }
    ++rotation;
    if (next < 0)
      return t;
    t = next;
  }
  throw std::runtime_error("delaunay: point location did not terminate");
}

int DelaunayTriangulation::insert(Vec2 p) {
  const int t0 = locate(p);
  for (int v : tris_[static_cast<std::size_t>(t0)].v)
    if (points_[static_cast<std::size_t>(v)] == p)
      return -1;

  const int pid = static_cast<int>(points_.size());
  points_.push_back(p);

  if (stamp_.size() < tris_.size())
    stamp_.resize(tris_.size() * 2, 0);
  // Two stamps per insertion: in cavity / known outside.
  stamp_counter_ += 2;
  const int in_cavity = stamp_counter_;
  const int outside = stamp_counter_ + 1;
  // Guard against counter wrap; never expected in practice.
  if (stamp_counter_ > (1 << 30)) {
    std::fill(stamp_.begin(), stamp_.end(), 0);
    stamp_counter_ = 2;
  }

  struct BoundaryEdge {
    int a, b, outer, outer_slot;
  };
  std::vector<BoundaryEdge> edges;
  cavity_.clear();
  cavity_.push_back(t0);
  stamp_[static_cast<std::size_t>(t0)] = in_cavity;
  for (std::size_t k = 0; k < cavity_.size(); ++k) {
    const int t = cavity_[k];
    const Tri tri = tris_[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      const int n = tri.nbr[static_cast<std::size_t>(i)];
      const int a = tri.v[static_cast<std::size_t>((i + 1) % 3)];
      const int b = tri.v[static_cast<std::size_t>((i + 2) % 3)];
      bool grow = false;
      if (n >= 0) {
        const int s = stamp_[static_cast<std::size_t>(n)];
        if (s == in_cavity)
          continue;
        if (s != outside) {
          const Tri &nt = tris_[static_cast<std::size_t>(n)];
          grow = incircle(points_[static_cast<std::size_t>(nt.v[0])], points_[static_cast<std::size_t>(nt.v[1])],
                          points_[static_cast<std::size_t>(nt.v[2])], p) > 0;
          stamp_[static_cast<std::size_t>(n)] = grow ? in_cavity : outside;
        }
      }
      if (grow) {
        cavity_.push_back(n);
        continue;
      }
      int slot = -1;
      if (n >= 0) {
        const Tri &nt = tris_[static_cast<std::size_t>(n)];
        for (int j = 0; j < 3; ++j)
          if (nt.nbr[static_cast<std::size_t>(j)] == t)
            slot = j;
      }
      edges.push_back({a, b, n, slot});
    }
  }

  // Edges whose outer neighbour joined the cavity after being recorded.
  std::erase_if(edges, [&](const BoundaryEdge &e) {
    return e.outer >= 0 && stamp_[static_cast<std::size_t>(e.outer)] == in_cavity;
  });

  for (int t : cavity_)
    tris_[static_cast<std::size_t>(t)].alive = false;

  std::vector<int> slots(cavity_.begin(), cavity_.end());
  while (slots.size() < edges.size()) {
    slots.push_back(static_cast<int>(tris_.size()));
    tris_.emplace_back();
  }
  if (stamp_.size() < tris_.size())
    stamp_.resize(tris_.size() * 2, 0);

  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto &e = edges[k];
    Tri &nt = tris_[static_cast<std::size_t>(slots[k])];
    nt.v = {e.a, e.b, pid};
    nt.nbr = {-1, -1, e.outer};
    nt.alive = true;
    if (e.outer >= 0)
      tris_[static_cast<std::size_t>(e.outer)].nbr[static_cast<std::size_t>(e.outer_slot)] = slots[k];
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    Tri &nt = tris_[static_cast<std::size_t>(slots[k])];
    for (std::size_t m = 0; m < edges.size(); ++m) {
      if (m == k)
        continue;
      if (edges[m].a == edges[k].b)
        nt.nbr[0] = slots[m];
      if (edges[m].b == edges[k].a)
        nt.nbr[1] = slots[m];
    }
  }
  last_ = slots.front();
  return pid;
}

} // namespace serrin::detail
