#include "serrin/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <numeric>
#include <thread>

#include "serrin/error.hpp"

namespace serrin {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

/// Runs f(i) for i in [0, n) on up to `jobs` threads. Exceptions are kept
/// per index; the caller decides what to do with them.
template <class F> std::vector<std::exception_ptr> parallel_for(std::size_t n, unsigned jobs, F &&f) {
  std::vector<std::exception_ptr> errors(n);
  if (jobs == 0)
    jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j)
    pool.emplace_back(worker);
  worker();
  for (auto &t : pool)
    t.join();
  return errors;
}

std::string describe(const std::exception_ptr &e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception &ex) {
    return ex.what();
  } catch (...) {
    return "unknown failure";
  }
}

/// Marks failed rows and returns a status for the sweep.
std::string collect_failures(const std::vector<std::exception_ptr> &errors, std::vector<SweepRow> &rows) {
  std::string status;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i])
      continue;
    const std::string msg = describe(errors[i]);
    rows[i].flag = "failed: " + msg;
    rows[i].metrics.clear();
    if (status.empty())
      status = "partial: member " + std::to_string(i) + " failed: " + msg;
  }
  return status;
}

/// Fits metric y against metric x over rows marked in_fit, in row order.
void fit_rows(SweepResult &r) {
  std::vector<double> x, y;
  std::vector<std::size_t> row_of;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    if (!r.rows[i].in_fit)
      continue;
    x.push_back(r.rows[i].metrics.at(r.fit_x));
    y.push_back(r.rows[i].metrics.at(r.fit_y));
    row_of.push_back(i);
  }
  if (x.size() < 3) {
    r.fit.ok = false;
    r.fit.status = "fewer than 3 points above the resolution floor";
    if (r.status == "ok")
      r.status = "insufficient points";
    return;
  }
  try {
    r.fit = slope_fit(x, y, r.window);
  } catch (const ValidationError &e) {
    r.fit = {};
    r.fit.status = e.what();
    if (r.status == "ok")
      r.status = "fit failed";
    return;
  }
  // Report indices as row indices.
  for (auto &i : r.fit.used)
    i = row_of[i];
  for (auto &i : r.fit.excluded)
    i = row_of[i];
  std::vector<char> used(r.rows.size(), 0);
  for (auto i : r.fit.used)
    used[i] = 1;
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (r.rows[i].in_fit && !used[i]) {
      r.rows[i].in_fit = false;
      if (r.rows[i].flag.empty())
        r.rows[i].flag = "outside fit window";
    }
}

double max_abs_difference(const BoundaryTrace &a, const BoundaryTrace &b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::abs(a.values[i] - b.values[i]));
  return m;
}

bool is_concentric_disk_pair(const DomainSpec &domain, const InclusionSpec &inclusion) {
  return domain.kind == ShapeKind::disk && inclusion.kind == ShapeKind::disk &&
         distance(domain.center, inclusion.center) < 1e-12;
}

/// Radius of the largest disk about the domain centre.
double inner_radius(const DomainSpec &domain) {
  const Curve c(domain);
  return c.closest(c.center()).distance;
}

/// gap / ||dn v - c||_inf for the domain itself, or nullopt for a disk.
std::optional<double> own_stability_constant(const Mesh &mesh, const SolverConfig &cfg) {
  const auto r = report_on_mesh(mesh, 1.0, {}, cfg);
  if (r.gap <= 10.0 * mesh.h_max * mesh.h_max || r.deviation_linf <= 0.0)
    return std::nullopt;
  return r.gap / r.deviation_linf;
}

void sort_by_magnitude_descending(std::vector<double> &values) {
  std::stable_sort(values.begin(), values.end(), [](double a, double b) { return std::abs(a) > std::abs(b); });
}

} // namespace

// ---------------------------------------------------------------------------

FitResult slope_fit(const std::vector<double> &x, const std::vector<double> &y, std::size_t window) {
  if (x.size() != y.size())
    throw ValidationError("slope_fit: x and y differ in length");
  if (x.size() < 3)
    throw ValidationError("slope_fit: need at least 3 points");
  if (window < 2)
    throw ValidationError("slope_fit: window must be at least 2");
  const bool increasing = x[1] > x[0];
  for (std::size_t i = 1; i < x.size(); ++i)
    if (increasing ? !(x[i] > x[i - 1]) : !(x[i] < x[i - 1]))
      throw ValidationError("slope_fit: x must be strictly monotone");

  FitResult fit;
  std::vector<std::size_t> usable;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i]))
      usable.push_back(i);
    else
      fit.excluded.push_back(i);
  }
  if (usable.empty()) {
    fit.status = "exact case";
    return fit;
  }
  if (usable.size() > window)
    usable.erase(usable.begin(), usable.end() - static_cast<std::ptrdiff_t>(window));
  fit.used = usable;
  if (usable.size() < 2) {
    fit.status = "fewer than 2 positive points";
    return fit;
  }
  const double n = static_cast<double>(usable.size());
  double sx = 0, sy = 0;
  for (auto i : usable) {
    sx += std::log(x[i]);
    sy += std::log(y[i]);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (auto i : usable) {
    const double dx = std::log(x[i]) - mx, dy = std::log(y[i]) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (auto i : usable) {
    const double e = std::log(y[i]) - (fit.intercept + fit.slope * std::log(x[i]));
    ss_res += e * e;
  }
  fit.r2 = syy > 0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
  fit.ok = true;
  fit.status = fit.excluded.empty() ? "ok" : "ok (nonpositive points excluded)";
  return fit;
}

const char *to_string(SweepKind kind) {
  switch (kind) {
  case SweepKind::stability:
    return "stability";
  case SweepKind::sigma:
    return "sigma";
  case SweepKind::inclusion:
    return "inclusion";
  case SweepKind::frechet:
    return "frechet";
  }
  return "stability";
}

std::vector<FamilyMember> ellipse_family(const std::vector<double> &e_values) {
  std::vector<FamilyMember> out;
  for (double e : e_values)
    out.push_back({e, DomainSpec::ellipse(1.0 + e, 1.0)});
  return out;
}

std::vector<FamilyMember> star_family(const std::vector<double> &epsilons, int mode) {
  std::vector<FamilyMember> out;
  for (double e : epsilons)
    out.push_back({e, DomainSpec::star(1.0, e, mode)});
  return out;
}

SweepResult one_phase_stability_sweep(std::vector<FamilyMember> family, const SweepOptions &opt) {
  if (family.size() < 3)
    throw ValidationError("family: need at least 3 members");
  for (const auto &m : family)
    m.domain.validate();
  std::stable_sort(family.begin(), family.end(),
                   [](const FamilyMember &a, const FamilyMember &b) { return a.parameter > b.parameter; });
  for (std::size_t i = 1; i < family.size(); ++i)
    if (!(family[i].parameter < family[i - 1].parameter))
      throw ValidationError("family: parameters must be distinct");

  SweepResult r;
  r.kind = SweepKind::stability;
  r.window = opt.window;
  r.columns = {"gap", "dev_L2", "dev_Linf", "perimeter", "ratio", "rho_i", "rho_e", "h_max"};
  r.fit_x = "dev_Linf";
  r.fit_y = "gap";
  r.rows.resize(family.size());

  // Oracle fixture: the disk of the same area as the smallest member.
  const double disk_radius = std::sqrt(Curve(family.back().domain).area() / std::numbers::pi);
  SerrinReport floor_report;
  std::vector<SerrinReport> reports(family.size());
  const auto errors = parallel_for(family.size() + 1, opt.jobs, [&](std::size_t i) {
    if (i == family.size())
      floor_report = full_report(DomainSpec::disk(disk_radius), InclusionSpec::none(), 1.0, opt.target_h, {},
                                 opt.solver);
    else
      reports[i] = full_report(family[i].domain, InclusionSpec::none(), 1.0, opt.target_h, {}, opt.solver);
  });
  if (errors.back())
    std::rethrow_exception(errors.back());
  const std::vector<std::exception_ptr> member_errors(errors.begin(), errors.end() - 1);

  const double dev_floor = 10.0 * floor_report.deviation_linf;
  const double gap_floor = 10.0 * std::max(floor_report.gap, 1e-3 * opt.target_h * opt.target_h);
  bool any_gap = false;
  for (std::size_t i = 0; i < family.size(); ++i) {
    const auto &rep = reports[i];
    auto &row = r.rows[i];
    row.parameter = family[i].parameter;
    row.metrics = {{"gap", rep.gap},
                   {"dev_L2", rep.deviation_l2},
                   {"dev_Linf", rep.deviation_linf},
                   {"perimeter", rep.perimeter},
                   {"ratio", rep.deviation_linf > 0 ? rep.gap / rep.deviation_linf : nan},
                   {"rho_i", rep.rho_i},
                   {"rho_e", rep.rho_e},
                   {"h_max", rep.h_max}};
    r.h_max = std::max(r.h_max, rep.h_max);
    if (rep.gap > gap_floor)
      any_gap = true;
    if (rep.deviation_linf < dev_floor || rep.gap < gap_floor)
      row.flag = "below resolution floor";
    else
      row.in_fit = true;
  }
  const std::string failure = collect_failures(member_errors, r.rows);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (member_errors[i])
      r.rows[i].in_fit = false;
  if (!failure.empty())
    r.status = failure;
  r.constants["dev_floor"] = dev_floor;
  r.constants["gap_floor"] = gap_floor;
  if (!any_gap) {
    if (r.status == "ok")
      r.status = "exact case";
    r.fit.status = "exact case";
    return r;
  }
  fit_rows(r);

  // Boundedness of gap / dev across the family, and the empirical constant.
  double c1 = 0.0;
  std::vector<double> ratios;
  for (const auto &row : r.rows)
    if (row.in_fit) {
      c1 = std::max(c1, row.metrics.at("ratio"));
      ratios.push_back(row.metrics.at("ratio"));
    }
  r.constants["C1"] = c1;
  if (!ratios.empty()) {
    r.constants["ratio_largest_parameter"] = ratios.front();
    r.constants["ratio_smallest_parameter"] = ratios.back();
    r.constants["ratio_growth"] = ratios.back() / ratios.front();
  }
  r.constants["tau"] = 1.0;
  return r;
}

SweepResult sigma_sweep(const DomainSpec &domain, const InclusionSpec &inclusion, std::vector<double> t_values,
                        const SweepOptions &opt, std::optional<double> stability_constant) {
  domain.validate();
  inclusion.validate();
  if (t_values.size() < 3)
    throw ValidationError("t_values: need at least 3 values");
  for (double t : t_values)
    if (!(t > -1.0))
      throw ValidationError("t_values: sigma_c = 1 + t must stay positive (t > -1)");
  sort_by_magnitude_descending(t_values);

  SweepResult r;
  r.kind = SweepKind::sigma;
  r.window = opt.window;
  r.columns = {"abs_t", "diff_Linf", "dev_L2", "dev_Linf", "dev0_Linf", "perimeter", "ratio", "floor",
               "triangle_ok"};
  r.fit_x = "abs_t";
  r.fit_y = "diff_Linf";
  r.rows.resize(t_values.size());

  const Mesh mesh = generate(domain, inclusion, opt.target_h);
  r.h_max = mesh.h_max;
  const auto ap = exact_area_perimeter(domain);
  const double c = serrin_constant(ap.area, ap.perimeter);
  const BoundaryTrace base = normal_derivative(mesh, solve_one_phase(mesh, opt.solver), 1.0);
  const double dev0 = deviation_norms(base, c).linf;

  // Oracle fixture: concentric disks with the same radii, where the flux
  // does not depend on t at all.
  std::optional<Mesh> oracle;
  BoundaryTrace oracle_base;
  if (!inclusion.empty()) {
    oracle = generate(DomainSpec::disk(inner_radius(domain)),
                      InclusionSpec::disk(std::sqrt(inclusion_area(inclusion) / std::numbers::pi)), opt.target_h);
    oracle_base = normal_derivative(*oracle, solve_one_phase(*oracle, opt.solver), 1.0);
  }

  const auto errors = parallel_for(t_values.size(), opt.jobs, [&](std::size_t i) {
    const double t = t_values[i];
    const double sigma = 1.0 + t;
    const BoundaryTrace tr = normal_derivative(mesh, solve_two_phase(mesh, sigma, opt.solver), sigma);
    const double diff = max_abs_difference(tr, base);
    const auto dev = deviation_norms(tr, c);
    double floor = 0.0;
    if (oracle)
      floor = max_abs_difference(normal_derivative(*oracle, solve_two_phase(*oracle, sigma, opt.solver), sigma),
                                 oracle_base);
    auto &row = r.rows[i];
    row.parameter = t;
    row.metrics = {{"abs_t", std::abs(t)},
                   {"diff_Linf", diff},
                   {"dev_L2", dev.l2},
                   {"dev_Linf", dev.linf},
                   {"dev0_Linf", dev0},
                   {"perimeter", ap.perimeter},
                   {"ratio", t != 0.0 ? diff / std::abs(t) : nan},
                   {"floor", floor},
                   {"triangle_ok", dev.linf <= diff + dev0 + 1e-15 ? 1.0 : 0.0}};
    if (t == 0.0 || diff < 10.0 * floor)
      row.flag = "below resolution floor";
    else
      row.in_fit = true;
  });
  const std::string failure = collect_failures(errors, r.rows);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (errors[i])
      r.rows[i].in_fit = false;
  if (!failure.empty())
    r.status = failure;

  if (inclusion.empty()) {
    if (r.status == "ok")
      r.status = "degenerate: no inclusion";
    r.fit.status = r.status;
    return r;
  }
  if (is_concentric_disk_pair(domain, inclusion)) {
    if (r.status == "ok")
      r.status = "degenerate: exact solution family";
    r.fit.status = r.status;
    return r;
  }
  fit_rows(r);

  double c7 = 0.0;
  for (const auto &row : r.rows)
    if (row.in_fit)
      c7 = std::max(c7, row.metrics.at("ratio"));
  r.constants["C7"] = c7;
  if (!stability_constant)
    stability_constant = own_stability_constant(mesh, opt.solver);
  if (stability_constant) {
    r.constants["C1"] = *stability_constant;
    r.constants["C2"] = *stability_constant * c7;
  }
  return r;
}

SweepResult frechet_check(const DomainSpec &domain, const InclusionSpec &inclusion, double t0,
                          std::vector<double> eps_values, const SweepOptions &opt) {
  domain.validate();
  inclusion.validate();
  if (!(t0 > -1.0))
    throw ValidationError("t0: must exceed -1");
  if (eps_values.size() < 3)
    throw ValidationError("eps_values: need at least 3 values");
  for (double e : eps_values)
    if (!(e > 0) || !(t0 + e > -1.0))
      throw ValidationError("eps_values: must be positive with sigma_c = 1 + t0 + eps > 0");
  std::stable_sort(eps_values.begin(), eps_values.end(), std::greater<>());

  SweepResult r;
  r.kind = SweepKind::frechet;
  r.window = opt.window;
  r.columns = {"eps", "error_L2", "solver_floor"};
  r.fit_x = "eps";
  r.fit_y = "error_L2";
  r.rows.resize(eps_values.size());

  const Mesh mesh = generate(domain, inclusion, opt.target_h);
  r.h_max = mesh.h_max;
  const double sigma0 = 1.0 + t0;
  const Field u0 = solve_two_phase(mesh, sigma0, opt.solver);
  const Field du = solve_linearized(mesh, sigma0, u0, opt.solver);
  const double u_norm = l2_norm(mesh, u0.values);
  if (!inclusion.empty())
    r.constants["u_prime_at_inclusion_center"] = evaluate(mesh, du, inclusion.center);
  r.constants["u_prime_L2"] = l2_norm(mesh, du.values);

  const auto errors = parallel_for(eps_values.size(), opt.jobs, [&](std::size_t i) {
    const double eps = eps_values[i];
    const Field u1 = solve_two_phase(mesh, sigma0 + eps, opt.solver);
    std::vector<double> diff(u1.values.size());
    for (std::size_t k = 0; k < diff.size(); ++k)
      diff[k] = (u1.values[k] - u0.values[k]) / eps - du.values[k];
    const double err = l2_norm(mesh, diff);
    // Both solves carry a relative error of roughly the CG tolerance.
    const double floor = 2.0 * opt.solver.cg_rel_tolerance * u_norm / eps;
    auto &row = r.rows[i];
    row.parameter = eps;
    row.metrics = {{"eps", eps}, {"error_L2", err}, {"solver_floor", floor}};
    if (eps < 1e3 * opt.solver.cg_rel_tolerance)
      row.flag = "below solver resolution";
    else if (err < 10.0 * floor)
      row.flag = "below resolution floor";
    else
      row.in_fit = true;
  });
  const std::string failure = collect_failures(errors, r.rows);
  for (std::size_t i = 0; i < r.rows.size(); ++i)
    if (errors[i])
      r.rows[i].in_fit = false;
  if (!failure.empty())
    r.status = failure;
  double floor_max = 0.0;
  for (const auto &row : r.rows)
    if (row.metrics.count("solver_floor"))
      floor_max = std::max(floor_max, row.metrics.at("solver_floor"));
  r.constants["solver_floor_max"] = floor_max;
  if (inclusion.empty()) {
    if (r.status == "ok")
      r.status = "degenerate: no inclusion";
    r.fit.status = r.status;
    return r;
  }
  fit_rows(r);
  return r;
}

SweepResult inclusion_sweep(const DomainSpec &domain, double sigma_c, std::vector<double> radii, Vec2 center,
                            const SweepOptions &opt, std::optional<double> stability_constant) {
  domain.validate();
  if (!(sigma_c > 0))
    throw ValidationError("sigma_c: must be positive");
  if (radii.size() < 3)
    throw ValidationError("radii: need at least 3 values");
  for (double rad : radii)
    if (!(rad > 0))
      throw ValidationError("radii: must be positive");
  std::stable_sort(radii.begin(), radii.end(), std::greater<>());
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] < radii[i - 1]))
      throw ValidationError("radii: must be distinct");

  // M is fixed by the largest inclusion; smaller ones only move away.
  const double M = inclusion_margin(domain, InclusionSpec::disk(radii.front(), center)).M;
  for (double rad : radii)
    if (inclusion_margin(domain, InclusionSpec::disk(rad, center)).margin < 1.0 / M)
      throw ValidationError("radii: inclusion margin drops below 1/M across the sweep");

  SweepResult r;
  r.kind = SweepKind::inclusion;
  r.window = opt.window;
  r.columns = {"area", "grad_w_Linf", "ratio_half", "ratio_one", "dev_L2", "dev_Linf", "perimeter", "margin",
               "floor", "h_max"};
  r.fit_x = "area";
  r.fit_y = "grad_w_Linf";
  r.rows.resize(radii.size());
  const auto ap = exact_area_perimeter(domain);
  const double c = serrin_constant(ap.area, ap.perimeter);
  const double oracle_radius = inner_radius(domain);

  auto boundary_gradient = [&](const Mesh &mesh) {
    const Field u = solve_two_phase(mesh, sigma_c, opt.solver);
    const Field v = solve_one_phase(mesh, opt.solver);
    const BoundaryTrace tu = normal_derivative(mesh, u, sigma_c);
    const BoundaryTrace tv = normal_derivative(mesh, v, 1.0);
    // w = u - v vanishes on the boundary nodes, so its tangential
    // difference quotients are computed but expected to be zero.
    const std::size_t n = tu.values.size();
    double grad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n, k = (i + n - 1) % n;
      auto w_at = [&](std::size_t b) {
        const auto id = static_cast<std::size_t>(tu.vertex_ids[b]);
        return u.values[id] - v.values[id];
      };
      const double tang = 0.5 * ((w_at(j) - w_at(i)) / distance(tu.points[j], tu.points[i]) +
                                 (w_at(i) - w_at(k)) / distance(tu.points[i], tu.points[k]));
      grad = std::max(grad, std::hypot(tu.values[i] - tv.values[i], tang));
    }
    return std::pair{grad, deviation_norms(tu, c)};
  };

  std::vector<double> floors(radii.size());
  const auto errors = parallel_for(2 * radii.size(), opt.jobs, [&](std::size_t job) {
    const std::size_t i = job / 2;
    const double rad = radii[i];
    if (job % 2 == 1) {
      const Mesh oracle = generate(DomainSpec::disk(oracle_radius), InclusionSpec::disk(rad), opt.target_h);
      floors[i] = boundary_gradient(oracle).first;
      return;
    }
    const InclusionSpec inc = InclusionSpec::disk(rad, center);
    const Mesh mesh = generate(domain, inc, opt.target_h);
    const auto [grad, dev] = boundary_gradient(mesh);
    const double area = inclusion_area(inc);
    auto &row = r.rows[i];
    row.parameter = rad;
    row.metrics = {{"area", area},
                   {"grad_w_Linf", grad},
                   {"ratio_half", grad / std::sqrt(area)},
                   {"ratio_one", grad / area},
                   {"dev_L2", dev.l2},
                   {"dev_Linf", dev.linf},
                   {"perimeter", ap.perimeter},
                   {"margin", inclusion_margin(domain, inc).margin},
                   {"h_max", mesh.h_max}};
  });
  std::vector<std::exception_ptr> row_errors(radii.size());
  for (std::size_t job = 0; job < errors.size(); ++job)
    if (errors[job] && !row_errors[job / 2])
      row_errors[job / 2] = errors[job];
  for (std::size_t i = 0; i < radii.size(); ++i) {
    auto &row = r.rows[i];
    row.parameter = radii[i];
    if (row_errors[i])
      continue;
    row.metrics["floor"] = floors[i];
    r.h_max = std::max(r.h_max, row.metrics.at("h_max"));
    if (row.metrics.at("grad_w_Linf") < 10.0 * floors[i])
      row.flag = "below resolution floor";
    else
      row.in_fit = true;
  }
  const std::string failure = collect_failures(row_errors, r.rows);
  if (!failure.empty())
    r.status = failure;
  r.constants["M"] = M;
  r.constants["theory_slope"] = 0.5;
  r.constants["improved_slope"] = 1.0;
  if (sigma_c == 1.0) {
    if (r.status == "ok")
      r.status = "degenerate: sigma_c = 1";
    r.fit.status = r.status;
    return r;
  }
  if (domain.kind == ShapeKind::disk && distance(domain.center, center) < 1e-12) {
    if (r.status == "ok")
      r.status = "degenerate: exact solution family";
    r.fit.status = r.status;
    return r;
  }
  fit_rows(r);
  if (r.fit.ok) {
    r.constants["slope_minus_theory"] = r.fit.slope - 0.5;
    r.constants["slope_minus_improved"] = r.fit.slope - 1.0;
  }
  double c_grad = 0.0;
  for (const auto &row : r.rows)
    if (row.in_fit)
      c_grad = std::max(c_grad, row.metrics.at("ratio_half"));
  r.constants["C_grad"] = c_grad;
  if (!stability_constant)
    stability_constant = own_stability_constant(generate(domain, InclusionSpec::none(), opt.target_h), opt.solver);
  if (stability_constant) {
    r.constants["C1"] = *stability_constant;
    r.constants["C3"] = *stability_constant * c_grad;
  }
  return r;
}

NonexistenceReport nonexistence_threshold(const DomainSpec &domain, double fitted_c2, double fitted_c3,
                                          double target_h, const SolverConfig &cfg) {
  if (!(fitted_c2 > 0) || !(fitted_c3 > 0))
    throw ValidationError("fitted constants: must be positive");
  const auto rep = full_report(domain, InclusionSpec::none(), 1.0, target_h, {}, cfg);
  if (rep.gap <= 10.0 * target_h * target_h)
    throw ValidationError("domain: indistinguishable from a ball at this resolution (gap " +
                          std::to_string(rep.gap) + ")");
  NonexistenceReport out;
  out.gap = rep.gap;
  out.fitted_c2 = fitted_c2;
  out.fitted_c3 = fitted_c3;
  out.sigma_threshold = rep.gap / fitted_c2;
  out.area_threshold = (rep.gap / fitted_c3) * (rep.gap / fitted_c3);
  return out;
}

} // namespace serrin
