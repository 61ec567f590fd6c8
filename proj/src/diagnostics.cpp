#include "serrin/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <set>

#include "serrin/error.hpp"

namespace serrin {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

/// Vertices within `rings` edges of v, including v, in ascending order.
std::vector<int> vertex_patch(const Mesh &mesh, int v, int rings) {
  std::set<int> patch{v};
  for (int r = 0; r < rings; ++r) {
    std::set<int> grown = patch;
    for (const auto &t : mesh.triangles)
      if (patch.count(t.v[0]) || patch.count(t.v[1]) || patch.count(t.v[2]))
        grown.insert(t.v.begin(), t.v.end());
    patch = std::move(grown);
  }
  return {patch.begin(), patch.end()};
}

/// Gaussian elimination with partial pivoting; false if singular.
template <std::size_t N>
bool solve_dense(std::array<std::array<double, N>, N> a, std::array<double, N> b, std::array<double, N> &x) {
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t pivot = k;
    for (std::size_t i = k + 1; i < N; ++i)
      if (std::abs(a[i][k]) > std::abs(a[pivot][k]))
        pivot = i;
    if (std::abs(a[pivot][k]) < 1e-13)
      return false;
    std::swap(a[k], a[pivot]);
    std::swap(b[k], b[pivot]);
    for (std::size_t i = k + 1; i < N; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < N; ++j)
        a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  for (std::size_t k = N; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < N; ++j)
      s -= a[k][j] * x[j];
    x[k] = s / a[k][k];
  }
  return true;
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  double s = 0.0, w = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    s += values[i] * weights[i];
    w += weights[i];
  }
  return s / w;
}

} // namespace

double EtaSpec::operator()(double t) const { return amplitude * std::cos(mode * t + phase); }

std::string EtaSpec::describe() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.6g*cos(%d*t%+.6g)", amplitude, mode, phase);
  return buf;
}

DeviationNorms deviation_norms(const BoundaryTrace &trace, double c, std::span<const double> eta) {
  const std::size_t n = trace.values.size();
  if (!eta.empty() && eta.size() != n)
    throw ValidationError("eta: size does not match the boundary trace");
  for (double w : trace.weights)
    if (!(w > 0))
      throw ValidationError("deviation_norms: quadrature weights must be positive");
  if (!eta.empty()) {
    double linf = 0.0;
    for (double e : eta)
      linf = std::max(linf, std::abs(e));
    if (std::abs(weighted_mean(eta, trace.weights)) > 1e-8 * linf)
      throw ValidationError("eta: must have vanishing weighted mean over the boundary");
  }
  DeviationNorms out;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = trace.values[i] - c - (eta.empty() ? 0.0 : eta[i]);
    s += trace.weights[i] * d * d;
    out.linf = std::max(out.linf, std::abs(d));
  }
  out.l2 = std::sqrt(s);
  return out;
}

std::vector<double> project_eta(const BoundaryTrace &trace, const std::function<double(double)> &eta) {
  std::vector<double> values;
  values.reserve(trace.params.size());
  for (double t : trace.params)
    values.push_back(eta(t));
  const double mean = weighted_mean(values, trace.weights);
  for (double &e : values)
    e -= mean;
  return values;
}

Vec2 max_point(const Mesh &mesh, const Field &v) {
  require_same_mesh(mesh, v, "max_point");
  const auto best = std::max_element(v.values.begin(), v.values.end()) - v.values.begin();
  const int vb = static_cast<int>(best);
  if (mesh.is_boundary_vertex(vb))
    throw ValidationError("max_point: maximum lies on the boundary");
  const Vec2 x0 = mesh.vertices[idx(vb)];
  const auto patch = vertex_patch(mesh, vb, 2);
  double scale = 0.0;
  for (int w : patch)
    scale = std::max(scale, distance(mesh.vertices[idx(w)], x0));

  // v ~ a + b.d + d^T H d / 2 in coordinates scaled by the patch radius.
  std::array<std::array<double, 6>, 6> ata{};
  std::array<double, 6> atv{};
  for (int w : patch) {
    const Vec2 d = (mesh.vertices[idx(w)] - x0) / scale;
    const std::array<double, 6> row{1.0, d.x, d.y, 0.5 * d.x * d.x, d.x * d.y, 0.5 * d.y * d.y};
    for (std::size_t i = 0; i < 6; ++i) {
      for (std::size_t j = 0; j < 6; ++j)
        ata[i][j] += row[i] * row[j];
      atv[i] += row[i] * v.values[idx(w)];
    }
  }
  std::array<double, 6> coef{};
  if (!solve_dense(ata, atv, coef))
    return x0;
  const double hxx = coef[3], hxy = coef[4], hyy = coef[5];
  const double det = hxx * hyy - hxy * hxy;
  if (!(hxx < 0 && det > 0))
    return x0;
  // Stationary point: H d = -b.
  const Vec2 d{(-coef[1] * hyy + coef[2] * hxy) / det, (-coef[2] * hxx + coef[1] * hxy) / det};
  if (norm(d) > 1.0)
    return x0;
  const Vec2 z = x0 + scale * d;
  return Curve(mesh.domain).contains(z) ? z : x0;
}

Field h_field(const Mesh &mesh, const Field &v, Vec2 z) {
  require_same_mesh(mesh, v, "h_field");
  Field h;
  h.mesh_id = mesh.id;
  h.label = FieldLabel::h;
  h.values.resize(v.values.size());
  for (std::size_t i = 0; i < h.values.size(); ++i)
    h.values[i] = v.values[i] + 0.25 * norm2(mesh.vertices[i] - z);
  return h;
}

IdentitySides fundamental_identity(const Mesh &mesh, const Field &v, Vec2 z) {
  const auto ap = exact_area_perimeter(mesh.domain);
  return fundamental_identity(mesh, v, normal_derivative(mesh, v, 1.0), z,
                              serrin_constant(ap.area, ap.perimeter));
}

IdentitySides fundamental_identity(const Mesh &mesh, const Field &v, const BoundaryTrace &dn_v, Vec2 z,
                                   double c) {
  require_same_mesh(mesh, v, "fundamental_identity");
  const auto hess = hessian_recovery(mesh, v);
  std::vector<double> norm_h(hess.size());
  for (std::size_t i = 0; i < hess.size(); ++i) {
    Sym2 m = hess[i];
    m.xx += 0.5;
    m.yy += 0.5;
    norm_h[i] = m.frobenius2();
  }
  IdentitySides out;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto &tv = mesh.triangles[t].v;
    const double vbar = (v.values[idx(tv[0])] + v.values[idx(tv[1])] + v.values[idx(tv[2])]) / 3.0;
    const double nbar = (norm_h[idx(tv[0])] + norm_h[idx(tv[1])] + norm_h[idx(tv[2])]) / 3.0;
    out.lhs += mesh.triangle_area(t) * vbar * nbar;
  }
  for (std::size_t i = 0; i < dn_v.values.size(); ++i) {
    const double g = dn_v.values[i];
    const double dn_q = -0.5 * dot(dn_v.points[i] - z, dn_v.normals[i]);
    out.rhs += 0.5 * dn_v.weights[i] * (c * c - g * g) * (g - dn_q);
  }
  out.relative_gap = std::abs(out.lhs - out.rhs) / std::max({out.lhs, out.rhs, 1e-14});
  return out;
}

OscillationCheck osc_check(const Mesh &mesh, Vec2 z, double rho_i, double rho_e, double diameter) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int b : mesh.boundary_vertex_ids) {
    const double h = 0.25 * norm2(mesh.vertices[idx(b)] - z);
    lo = std::min(lo, h);
    hi = std::max(hi, h);
  }
  OscillationCheck out;
  out.osc = hi - lo;
  out.residual = std::abs(out.osc - 0.25 * (rho_e * rho_e - rho_i * rho_i));
  out.slack = 8.0 / diameter * out.osc - (rho_e - rho_i);
  return out;
}

GrowthCheck growth_check(const Mesh &mesh, const Field &v) {
  require_same_mesh(mesh, v, "growth_check");
  const Curve outer(mesh.domain);
  GrowthCheck out;
  out.ratio_min = std::numeric_limits<double>::infinity();
  out.quadratic_slack_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (mesh.is_boundary_vertex(static_cast<int>(i)))
      continue;
    const double delta = outer.closest(mesh.vertices[i], 256).distance;
    out.ratio_min = std::min(out.ratio_min, v.values[i] / delta);
    out.quadratic_slack_min = std::min(out.quadratic_slack_min, v.values[i] - 0.25 * delta * delta);
  }
  return out;
}

bool SerrinReport::bridge_holds() const {
  return deviation_l2 <= std::sqrt(perimeter) * deviation_linf * (1.0 + 1e-12);
}

SerrinReport report_on_mesh(const Mesh &mesh, double sigma_c, const std::optional<EtaSpec> &eta,
                            const SolverConfig &cfg) {
  SerrinReport r;
  const auto ap = exact_area_perimeter(mesh.domain);
  r.c = serrin_constant(ap.area, ap.perimeter);
  r.perimeter = ap.perimeter;
  r.h_max = mesh.h_max;
  r.eta = eta;

  const Field v = solve_one_phase(mesh, cfg);
  const BoundaryTrace dn_v = normal_derivative(mesh, v, 1.0);
  const bool one_phase = mesh.inclusion.empty() || sigma_c == 1.0;
  BoundaryTrace dn_u;
  if (one_phase) {
    if (!(sigma_c > 0))
      throw ValidationError("sigma_c: must be positive");
    dn_u = dn_v;
  } else {
    dn_u = normal_derivative(mesh, solve_two_phase(mesh, sigma_c, cfg), sigma_c);
  }
  std::vector<double> eta_values;
  if (eta)
    eta_values = project_eta(dn_u, *eta);
  const auto dev = deviation_norms(dn_u, r.c, eta_values);
  r.deviation_l2 = dev.l2;
  r.deviation_linf = dev.linf;

  r.z = max_point(mesh, v);
  const auto rho = rho_bounds(mesh.domain, r.z);
  r.rho_i = rho.rho_i;
  r.rho_e = rho.rho_e;
  r.gap = rho.rho_e - rho.rho_i;

  const auto osc = osc_check(mesh, r.z, r.rho_i, r.rho_e, Curve(mesh.domain).diameter());
  r.osc_h = osc.osc;
  r.osc_identity_residual = osc.residual;
  r.osc_inequality_slack = osc.slack;

  const auto fi = fundamental_identity(mesh, v, dn_v, r.z, r.c);
  r.fi_lhs = fi.lhs;
  r.fi_rhs = fi.rhs;
  r.fi_relative_gap = fi.relative_gap;

  const auto growth = growth_check(mesh, v);
  r.growth_ratio_min = growth.ratio_min;
  r.growth_quadratic_slack = growth.quadratic_slack_min;
  return r;
}

SerrinReport full_report(const DomainSpec &domain, const InclusionSpec &inclusion, double sigma_c,
                         double target_h, const std::optional<EtaSpec> &eta, const SolverConfig &cfg) {
  if (!(sigma_c > 0))
    throw ValidationError("sigma_c: must be positive");
  return report_on_mesh(generate(domain, inclusion, target_h), sigma_c, eta, cfg);
}

} // namespace serrin
