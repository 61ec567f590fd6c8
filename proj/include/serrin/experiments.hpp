#pragma once

// Parameter sweeps and log-log fits: one-phase stability, dependence on
// sigma_c near 1, dependence on the inclusion size, finite-difference
// check of the derivative in sigma_c, and the non-existence thresholds.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "serrin/diagnostics.hpp"

namespace serrin {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Indices (into the input) of the points used.
  std::vector<std::size_t> used;
  /// Indices dropped because x or y was not positive.
  std::vector<std::size_t> excluded;
  bool ok = false;
  std::string status;
};

/// Least squares of log y on log x over the last `window` usable points.
/// Throws ValidationError for fewer than 3 points or non-monotone x.
FitResult slope_fit(const std::vector<double> &x, const std::vector<double> &y, std::size_t window = 4);

enum class SweepKind { stability, sigma, inclusion, frechet };

const char *to_string(SweepKind kind);

struct SweepRow {
  double parameter = 0.0;
  std::map<std::string, double> metrics;
  bool in_fit = false;
  std::string flag;
};

struct SweepResult {
  SweepKind kind = SweepKind::stability;
  /// "ok", "exact case", "degenerate: ...", or "partial: ...".
  std::string status = "ok";
  /// Metric names in CSV order (after the parameter column).
  std::vector<std::string> columns;
  std::vector<SweepRow> rows;
  std::string fit_x;
  std::string fit_y;
  FitResult fit;
  std::size_t window = 4;
  /// Empirical constants and comparison values, by name.
  std::map<std::string, double> constants;
  double h_max = 0.0;
};

struct SweepOptions {
  double target_h = 0.05;
  std::size_t window = 4;
  /// Concurrent jobs; 0 selects the hardware concurrency.
  unsigned jobs = 0;
  SolverConfig solver;
};

struct FamilyMember {
  double parameter = 0.0;
  DomainSpec domain;
};

/// Ellipses a = 1 + e, b = 1.
std::vector<FamilyMember> ellipse_family(const std::vector<double> &e_values);
/// Stars r0 = 1, the given amplitudes, fixed mode.
std::vector<FamilyMember> star_family(const std::vector<double> &epsilons, int mode);

/// Gap against boundary deviation of the torsion function over a family
/// shrinking to a disk.
SweepResult one_phase_stability_sweep(std::vector<FamilyMember> family, const SweepOptions &opt);

/// ||dn u(t) - dn u(0)||_inf against |t|, sigma_c = 1 + t.
SweepResult sigma_sweep(const DomainSpec &domain, const InclusionSpec &inclusion, std::vector<double> t_values,
                        const SweepOptions &opt, std::optional<double> stability_constant = {});

/// ||(u(t0 + e) - u(t0)) / e - u'(t0)||_L2 against e.
SweepResult frechet_check(const DomainSpec &domain, const InclusionSpec &inclusion, double t0,
                          std::vector<double> eps_values, const SweepOptions &opt);

/// ||grad(u - v)||_inf on the boundary against |D| for disks of the given
/// radii at a fixed centre.
SweepResult inclusion_sweep(const DomainSpec &domain, double sigma_c, std::vector<double> radii, Vec2 center,
                            const SweepOptions &opt, std::optional<double> stability_constant = {});

struct NonexistenceReport {
  double gap = 0.0;
  double fitted_c2 = 0.0;
  double fitted_c3 = 0.0;
  /// |sigma_c - 1| below this rules out an exact pair.
  double sigma_threshold = 0.0;
  /// |D| below this rules out an exact pair.
  double area_threshold = 0.0;
  std::string label = "empirical, conditional on fitted constants";
};

NonexistenceReport nonexistence_threshold(const DomainSpec &domain, double fitted_c2, double fitted_c3,
                                          double target_h, const SolverConfig &cfg = {});

} // namespace serrin
