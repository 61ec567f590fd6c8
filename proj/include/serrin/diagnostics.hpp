#pragma once

// Serrin-type diagnostics of a solved configuration: deviation of the
// normal derivative from c, the maximum point z of the torsion function,
// the inner/outer radii about z, the harmonic function h = v + |x - z|^2/4,
// both sides of the integral identity for h, and the growth of v away from
// the boundary.

#include <functional>
#include <optional>
#include <string>

#include "serrin/fem.hpp"
#include "serrin/geometry.hpp"

namespace serrin {

/// Boundary perturbation eta(t) = amplitude * cos(mode * t + phase), with t
/// the boundary parameter. Projected to zero weighted mean before use.
struct EtaSpec {
  double amplitude = 0.0;
  int mode = 1;
  double phase = 0.0;

  double operator()(double t) const;
  std::string describe() const;
  bool operator==(const EtaSpec &) const = default;
};

struct DeviationNorms {
  double l2 = 0.0;
  double linf = 0.0;
};

/// Norms of value - c - eta over the trace. A non-empty eta must already have
/// vanishing weighted mean.
DeviationNorms deviation_norms(const BoundaryTrace &trace, double c,
                               std::span<const double> eta = {});

/// eta sampled at the trace parameters, minus its weighted mean.
std::vector<double> project_eta(const BoundaryTrace &trace, const std::function<double(double)> &eta);

/// Maximum of v: the best vertex, refined by a quadratic fit over its
/// two-ring patch.
Vec2 max_point(const Mesh &mesh, const Field &v);

/// h = v + |x - z|^2 / 4.
Field h_field(const Mesh &mesh, const Field &v, Vec2 z);

struct IdentitySides {
  double lhs = 0.0;
  double rhs = 0.0;
  double relative_gap = 0.0;
};

/// int v |D^2 h|^2 against 1/2 int (c^2 - (dn v)^2) dn h, with c from the
/// parametric curve.
IdentitySides fundamental_identity(const Mesh &mesh, const Field &v, Vec2 z);
IdentitySides fundamental_identity(const Mesh &mesh, const Field &v, const BoundaryTrace &dn_v, Vec2 z,
                                   double c);

struct OscillationCheck {
  /// max - min of h over the boundary vertices.
  double osc = 0.0;
  /// |osc - (rho_e^2 - rho_i^2) / 4|.
  double residual = 0.0;
  /// (8 / diameter) osc - (rho_e - rho_i); nonnegative up to O(h).
  double slack = 0.0;
};

OscillationCheck osc_check(const Mesh &mesh, Vec2 z, double rho_i, double rho_e, double diameter);

struct GrowthCheck {
  /// min over interior vertices of v / dist(x, dOmega).
  double ratio_min = 0.0;
  /// min over all vertices of v - dist^2 / 4.
  double quadratic_slack_min = 0.0;
};

GrowthCheck growth_check(const Mesh &mesh, const Field &v);

struct SerrinReport {
  double c = 0.0;
  double perimeter = 0.0;
  double deviation_l2 = 0.0;
  double deviation_linf = 0.0;
  Vec2 z{};
  double rho_i = 0.0;
  double rho_e = 0.0;
  double gap = 0.0;
  double osc_h = 0.0;
  double osc_identity_residual = 0.0;
  double osc_inequality_slack = 0.0;
  double fi_lhs = 0.0;
  double fi_rhs = 0.0;
  double fi_relative_gap = 0.0;
  double growth_ratio_min = 0.0;
  double growth_quadratic_slack = 0.0;
  double h_max = 0.0;
  std::optional<EtaSpec> eta;

  /// deviation_l2 <= sqrt(perimeter) * deviation_linf.
  bool bridge_holds() const;
};

/// Full pipeline on a given mesh: u (two-phase) for the deviations, v
/// (one-phase) for everything about z.
SerrinReport report_on_mesh(const Mesh &mesh, double sigma_c, const std::optional<EtaSpec> &eta = {},
                            const SolverConfig &cfg = {});

SerrinReport full_report(const DomainSpec &domain, const InclusionSpec &inclusion, double sigma_c,
                         double target_h, const std::optional<EtaSpec> &eta = {},
                         const SolverConfig &cfg = {});

} // namespace serrin
