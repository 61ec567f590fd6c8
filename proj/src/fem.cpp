#include "serrin/fem.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "serrin/error.hpp"

namespace serrin {

namespace {

using Gradients = std::array<Vec2, 3>;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

/// Gradients of the three barycentric basis functions, and the area.
Gradients basis_gradients(const Mesh &mesh, std::size_t t, double &area) {
  const auto &v = mesh.triangles[t].v;
  const Vec2 p0 = mesh.vertices[idx(v[0])];
  const Vec2 p1 = mesh.vertices[idx(v[1])];
  const Vec2 p2 = mesh.vertices[idx(v[2])];
  const double twice = cross(p1 - p0, p2 - p0);
  area = 0.5 * twice;
  return {Vec2{p1.y - p2.y, p2.x - p1.x} / twice, Vec2{p2.y - p0.y, p0.x - p2.x} / twice,
          Vec2{p0.y - p1.y, p1.x - p0.x} / twice};
}

Vec2 element_gradient(const Mesh &mesh, std::span<const double> f, std::size_t t, double &area) {
  const auto g = basis_gradients(mesh, t, area);
  const auto &v = mesh.triangles[t].v;
  return f[idx(v[0])] * g[0] + f[idx(v[1])] * g[1] + f[idx(v[2])] * g[2];
}

std::vector<std::vector<int>> vertex_neighbours(const Mesh &mesh) {
  std::vector<std::vector<int>> adj(mesh.vertices.size());
  for (const auto &t : mesh.triangles)
    for (std::size_t i = 0; i < 3; ++i) {
      adj[idx(t.v[i])].push_back(t.v[(i + 1) % 3]);
      adj[idx(t.v[i])].push_back(t.v[(i + 2) % 3]);
    }
  for (auto &row : adj) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return adj;
}

/// Removes boundary rows/columns; the returned map sends vertex -> unknown.
CsrMatrix reduce(const Mesh &mesh, const CsrMatrix &full, std::vector<int> &dof) {
  const std::size_t n = mesh.vertices.size();
  dof.assign(n, -1);
  int count = 0;
  for (std::size_t v = 0; v < n; ++v)
    if (!mesh.is_boundary_vertex(static_cast<int>(v)))
      dof[v] = count++;
  CsrMatrix r;
  r.rows = static_cast<std::size_t>(count);
  r.row_ptr.reserve(r.rows + 1);
  for (std::size_t v = 0; v < n; ++v) {
    if (dof[v] < 0)
      continue;
    for (std::size_t k = full.row_ptr[v]; k < full.row_ptr[v + 1]; ++k) {
      const int c = dof[idx(full.col[k])];
      if (c < 0)
        continue;
      r.col.push_back(c);
      r.val.push_back(full.val[k]);
    }
    r.row_ptr.push_back(r.col.size());
  }
  return r;
}

Field solve_dirichlet(const Mesh &mesh, std::span<const double> sigma, std::vector<double> load,
                      const std::function<double(Vec2)> *boundary, const SolverConfig &cfg,
                      FieldLabel label) {
  cfg.validate();
  const CsrMatrix k = assemble_stiffness(mesh, sigma);
  std::vector<int> dof;
  const CsrMatrix a = reduce(mesh, k, dof);

  const std::size_t n = mesh.vertices.size();
  std::vector<double> values(n, 0.0);
  if (boundary) {
    for (int v : mesh.boundary_vertex_ids) {
      const double g = (*boundary)(mesh.vertices[idx(v)]);
      if (!std::isfinite(g))
        throw ValidationError("boundary data is not finite at a boundary vertex");
      values[idx(v)] = g;
    }
  }

  std::vector<double> rhs(a.rows, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    if (dof[v] < 0)
      continue;
    double s = load[v];
    if (boundary)
      for (std::size_t e = k.row_ptr[v]; e < k.row_ptr[v + 1]; ++e)
        if (dof[idx(k.col[e])] < 0)
          s -= k.val[e] * values[idx(k.col[e])];
    rhs[idx(dof[v])] = s;
  }

  std::vector<double> x(a.rows, 0.0);
  const auto result = conjugate_gradient(a, rhs, x, cfg.cg_rel_tolerance, cfg.iteration_budget(a.rows),
                                         cfg.diagonal_preconditioning);
  if (!result.converged) {
    std::ostringstream msg;
    msg << "conjugate gradients did not converge in " << result.iterations
        << " iterations (relative residual " << result.relative_residual << ")";
    throw SolverError(msg.str(), result.relative_residual);
  }
  for (std::size_t v = 0; v < n; ++v)
    if (dof[v] >= 0)
      values[v] = x[idx(dof[v])];

  Field f;
  f.mesh_id = mesh.id;
  f.values = std::move(values);
  f.label = label;
  f.cg_iterations = result.iterations;
  f.cg_relative_residual = result.relative_residual;
  f.load = std::move(load);
  return f;
}

void require_positive_sigma(double sigma_c) {
  if (!(sigma_c > 0) || !std::isfinite(sigma_c))
    throw ValidationError("sigma_c: must be positive");
}

} // namespace

// ---------------------------------------------------------------------------

void SolverConfig::validate() const {
  if (!(cg_rel_tolerance > 0) || cg_rel_tolerance > 1e-4)
    throw ValidationError("solver.cg_rel_tolerance: must lie in (0, 1e-4]");
  if (cg_max_iterations != 0 && cg_max_iterations < 100)
    throw ValidationError("solver.cg_max_iterations: must be at least 100");
}

int SolverConfig::iteration_budget(std::size_t unknowns) const {
  if (cg_max_iterations > 0)
    return cg_max_iterations;
  return static_cast<int>(20.0 * std::sqrt(static_cast<double>(unknowns))) + 1000;
}

const char *to_string(FieldLabel label) {
  switch (label) {
  case FieldLabel::u:
    return "u";
  case FieldLabel::v:
    return "v";
  case FieldLabel::w:
    return "w";
  case FieldLabel::h:
    return "h";
  case FieldLabel::u_prime:
    return "u_prime";
  case FieldLabel::custom:
    return "custom";
  }
  return "custom";
}

double BoundaryTrace::perimeter() const {
  double s = 0.0;
  for (double w : weights)
    s += w;
  return s;
}

double BoundaryTrace::integral() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i)
    s += values[i] * weights[i];
  return s;
}

void require_same_mesh(const Mesh &mesh, const Field &f, const char *what) {
  if (f.mesh_id != mesh.id || f.values.size() != mesh.vertices.size())
    throw ValidationError(std::string(what) + ": field does not belong to this mesh");
}

std::vector<double> element_sigma(const Mesh &mesh, double sigma_c) {
  std::vector<double> s(mesh.triangles.size(), 1.0);
  for (std::size_t t = 0; t < s.size(); ++t)
    if (mesh.triangles[t].region == Region::inside_D)
      s[t] = sigma_c;
  return s;
}

CsrMatrix assemble_stiffness(const Mesh &mesh, std::span<const double> sigma) {
  const auto adj = vertex_neighbours(mesh);
  CsrMatrix k;
  k.rows = mesh.vertices.size();
  k.row_ptr.assign(k.rows + 1, 0);
  for (std::size_t v = 0; v < k.rows; ++v)
    k.row_ptr[v + 1] = k.row_ptr[v] + adj[v].size() + 1;
  k.col.resize(k.row_ptr.back());
  k.val.assign(k.row_ptr.back(), 0.0);
  for (std::size_t v = 0; v < k.rows; ++v) {
    auto row = adj[v];
    row.push_back(static_cast<int>(v));
    std::sort(row.begin(), row.end());
    std::copy(row.begin(), row.end(), k.col.begin() + static_cast<std::ptrdiff_t>(k.row_ptr[v]));
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    double area = 0.0;
    const auto g = basis_gradients(mesh, t, area);
    const auto &v = mesh.triangles[t].v;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        *k.find(idx(v[i]), v[j]) += sigma[t] * area * dot(g[i], g[j]);
  }
  return k;
}

std::vector<double> assemble_unit_load(const Mesh &mesh) {
  std::vector<double> b(mesh.vertices.size(), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const double third = mesh.triangle_area(t) / 3.0;
    for (int v : mesh.triangles[t].v)
      b[idx(v)] += third;
  }
  return b;
}

Field solve_two_phase(const Mesh &mesh, double sigma_c, const SolverConfig &cfg) {
  require_positive_sigma(sigma_c);
  const auto sigma = element_sigma(mesh, sigma_c);
  return solve_dirichlet(mesh, sigma, assemble_unit_load(mesh), nullptr, cfg, FieldLabel::u);
}

Field solve_one_phase(const Mesh &mesh, const SolverConfig &cfg) {
  const std::vector<double> sigma(mesh.triangles.size(), 1.0);
  return solve_dirichlet(mesh, sigma, assemble_unit_load(mesh), nullptr, cfg, FieldLabel::v);
}

Field solve_harmonic_dirichlet(const Mesh &mesh, const std::function<double(Vec2)> &g,
                               const SolverConfig &cfg) {
  const std::vector<double> sigma(mesh.triangles.size(), 1.0);
  return solve_dirichlet(mesh, sigma, std::vector<double>(mesh.vertices.size(), 0.0), &g, cfg,
                         FieldLabel::h);
}

Field solve_linearized(const Mesh &mesh, double sigma_c, const Field &u_base, const SolverConfig &cfg) {
  require_positive_sigma(sigma_c);
  require_same_mesh(mesh, u_base, "solve_linearized");
  std::vector<double> load(mesh.vertices.size(), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (mesh.triangles[t].region != Region::inside_D)
      continue;
    double area = 0.0;
    const auto g = basis_gradients(mesh, t, area);
    const auto &v = mesh.triangles[t].v;
    const Vec2 grad_u = u_base.values[idx(v[0])] * g[0] + u_base.values[idx(v[1])] * g[1] +
                        u_base.values[idx(v[2])] * g[2];
    for (std::size_t i = 0; i < 3; ++i)
      load[idx(v[i])] -= area * dot(grad_u, g[i]);
  }
  const auto sigma = element_sigma(mesh, sigma_c);
  return solve_dirichlet(mesh, sigma, std::move(load), nullptr, cfg, FieldLabel::u_prime);
}

BoundaryTrace normal_derivative(const Mesh &mesh, const Field &f, double sigma_c) {
  require_same_mesh(mesh, f, "normal_derivative");
  require_positive_sigma(sigma_c);
  const auto sigma = element_sigma(mesh, sigma_c);
  const CsrMatrix k = assemble_stiffness(mesh, sigma);
  std::vector<double> kf(mesh.vertices.size());
  k.multiply(f.values, kf);

  const Curve outer(mesh.domain);
  const std::size_t n = mesh.boundary_vertex_ids.size();
  BoundaryTrace trace;
  trace.mesh_id = mesh.id;
  trace.vertex_ids = mesh.boundary_vertex_ids;
  std::vector<double> length(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int v = mesh.boundary_vertex_ids[i];
    trace.points.push_back(mesh.vertices[idx(v)]);
    trace.params.push_back(mesh.vertex_param[idx(v)]);
    trace.normals.push_back(outer.outward_normal(mesh.vertex_param[idx(v)]));
    length[i] = distance(mesh.vertices[idx(v)], mesh.vertices[idx(mesh.boundary_vertex_ids[(i + 1) % n])]);
  }
  std::vector<double> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = idx(mesh.boundary_vertex_ids[i]);
    rhs[i] = kf[v] - (f.load.empty() ? 0.0 : f.load[v]);
  }

  // Consistent P1 mass matrix of the boundary loop (cyclic tridiagonal).
  CsrMatrix m;
  m.rows = n;
  m.row_ptr.assign(1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t prev = (i + n - 1) % n;
    const std::size_t next = (i + 1) % n;
    std::array<std::pair<int, double>, 3> row{{{static_cast<int>(prev), length[prev] / 6.0},
                                               {static_cast<int>(i), (length[prev] + length[i]) / 3.0},
                                               {static_cast<int>(next), length[i] / 6.0}}};
    std::sort(row.begin(), row.end());
    for (const auto &[c, val] : row) {
      m.col.push_back(c);
      m.val.push_back(val);
    }
    m.row_ptr.push_back(m.col.size());
    trace.weights.push_back(0.5 * (length[prev] + length[i]));
  }
  trace.values.assign(n, 0.0);
  const auto result = conjugate_gradient(m, rhs, trace.values, 1e-14, 10 * static_cast<int>(n) + 100, true);
  if (!result.converged && result.relative_residual > 1e-12)
    throw SolverError("boundary mass-matrix solve did not converge", result.relative_residual);
  return trace;
}

std::vector<Vec2> recovered_gradients(const Mesh &mesh, const Field &f) {
  require_same_mesh(mesh, f, "recovered_gradients");
  std::vector<Vec2> g(mesh.vertices.size());
  std::vector<double> w(mesh.vertices.size(), 0.0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    double area = 0.0;
    const Vec2 grad = element_gradient(mesh, f.values, t, area);
    for (int v : mesh.triangles[t].v) {
      g[idx(v)] += area * grad;
      w[idx(v)] += area;
    }
  }
  for (std::size_t v = 0; v < g.size(); ++v)
    g[v] = g[v] / w[v];
  return g;
}

std::vector<Sym2> hessian_recovery(const Mesh &mesh, const Field &f) {
  const auto grad = recovered_gradients(mesh, f);
  const auto adj = vertex_neighbours(mesh);
  std::vector<Sym2> out(mesh.vertices.size());
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    std::vector<int> patch = adj[v];
    patch.push_back(static_cast<int>(v));
    if (patch.size() < 3)
      throw ValidationError("hessian_recovery: vertex patch has fewer than 3 points");
    // Normal equations in coordinates centred at v and scaled by the patch size.
    const Vec2 x0 = mesh.vertices[v];
    double scale = 0.0;
    for (int w : patch)
      scale = std::max(scale, distance(mesh.vertices[idx(w)], x0));
    std::array<std::array<double, 3>, 3> ata{};
    std::array<double, 3> atgx{}, atgy{};
    for (int w : patch) {
      const Vec2 d = (mesh.vertices[idx(w)] - x0) / scale;
      const std::array<double, 3> row{1.0, d.x, d.y};
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j)
          ata[i][j] += row[i] * row[j];
        atgx[i] += row[i] * grad[idx(w)].x;
        atgy[i] += row[i] * grad[idx(w)].y;
      }
    }
    // Cramer's rule on the 3x3 system.
    auto det3 = [](const std::array<std::array<double, 3>, 3> &m) {
      return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
             m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
             m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    };
    const double det = det3(ata);
    if (std::abs(det) < 1e-12 * static_cast<double>(patch.size() * patch.size() * patch.size()))
      throw ValidationError("hessian_recovery: degenerate vertex patch");
    auto solve_col = [&](const std::array<double, 3> &rhs, std::size_t col) {
      auto m = ata;
      for (std::size_t i = 0; i < 3; ++i)
        m[i][col] = rhs[i];
      return det3(m) / det;
    };
    const double gxx = solve_col(atgx, 1) / scale;
    const double gxy = solve_col(atgx, 2) / scale;
    const double gyx = solve_col(atgy, 1) / scale;
    const double gyy = solve_col(atgy, 2) / scale;
    out[v] = {gxx, 0.5 * (gxy + gyx), gyy};
  }
  return out;
}

double evaluate(const Mesh &mesh, const Field &f, Vec2 p) {
  require_same_mesh(mesh, f, "evaluate");
  constexpr double tol = -1e-12;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &v = mesh.triangles[t].v;
    const Vec2 a = mesh.vertices[idx(v[0])];
    const Vec2 b = mesh.vertices[idx(v[1])];
    const Vec2 c = mesh.vertices[idx(v[2])];
    const double twice = cross(b - a, c - a);
    const double l1 = cross(c - b, p - b) / twice;
    const double l2 = cross(a - c, p - c) / twice;
    const double l3 = 1.0 - l1 - l2;
    if (l1 >= tol && l2 >= tol && l3 >= tol)
      return l1 * f.values[idx(v[0])] + l2 * f.values[idx(v[1])] + l3 * f.values[idx(v[2])];
  }
  std::ostringstream msg;
  msg << "evaluate: point (" << p.x << ", " << p.y << ") is outside the mesh";
  throw ValidationError(msg.str());
}

namespace {

struct QuadPoint {
  double l1, l2, l3, w;
};

// Degree-5 seven-point rule on the reference triangle (weights sum to 1).
constexpr std::array<QuadPoint, 7> dunavant5{{
    {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 0.225},
    {0.059715871789770, 0.470142064105115, 0.470142064105115, 0.132394152788506},
    {0.470142064105115, 0.059715871789770, 0.470142064105115, 0.132394152788506},
    {0.470142064105115, 0.470142064105115, 0.059715871789770, 0.132394152788506},
    {0.797426985353087, 0.101286507323456, 0.101286507323456, 0.125939180544827},
    {0.101286507323456, 0.797426985353087, 0.101286507323456, 0.125939180544827},
    {0.101286507323456, 0.101286507323456, 0.797426985353087, 0.125939180544827},
}};

} // namespace

double l2_error(const Mesh &mesh, const Field &f, const std::function<double(Vec2)> &exact) {
  require_same_mesh(mesh, f, "l2_error");
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &v = mesh.triangles[t].v;
    const double area = mesh.triangle_area(t);
    for (const auto &q : dunavant5) {
      const Vec2 p = q.l1 * mesh.vertices[idx(v[0])] + q.l2 * mesh.vertices[idx(v[1])] +
                     q.l3 * mesh.vertices[idx(v[2])];
      const double fh = q.l1 * f.values[idx(v[0])] + q.l2 * f.values[idx(v[1])] + q.l3 * f.values[idx(v[2])];
      const double e = fh - exact(p);
      s += q.w * area * e * e;
    }
  }
  return std::sqrt(s);
}

double l2_norm(const Mesh &mesh, std::span<const double> values) {
  // Exact for P1: int (sum a_i l_i)^2 = A/6 (sum a_i^2 + sum_{i<j} a_i a_j).
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &v = mesh.triangles[t].v;
    const double a = values[idx(v[0])], b = values[idx(v[1])], c = values[idx(v[2])];
    s += mesh.triangle_area(t) / 6.0 * (a * a + b * b + c * c + a * b + b * c + c * a);
  }
  return std::sqrt(s);
}

double reduced_residual(const Mesh &mesh, double sigma_c, const Field &f) {
  require_same_mesh(mesh, f, "reduced_residual");
  const auto sigma = element_sigma(mesh, sigma_c);
  const CsrMatrix k = assemble_stiffness(mesh, sigma);
  std::vector<double> kf(mesh.vertices.size());
  k.multiply(f.values, kf);
  double r2 = 0.0, b2 = 0.0;
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
    if (mesh.is_boundary_vertex(static_cast<int>(v)))
      continue;
    const double load = f.load.empty() ? 0.0 : f.load[v];
    // Boundary contributions move to the right-hand side in the reduced
    // system, so they cancel in b - A x.
    r2 += (load - kf[v]) * (load - kf[v]);
    double rhs = load;
    for (std::size_t e = k.row_ptr[v]; e < k.row_ptr[v + 1]; ++e)
      if (mesh.is_boundary_vertex(k.col[e]))
        rhs -= k.val[e] * f.values[idx(k.col[e])];
    b2 += rhs * rhs;
  }
  return b2 > 0 ? std::sqrt(r2 / b2) : std::sqrt(r2);
}

} // namespace serrin
