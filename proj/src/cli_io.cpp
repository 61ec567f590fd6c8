#include "serrin/cli_io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "serrin/error.hpp"

#ifndef SERRIN_LAB_VERSION
#define SERRIN_LAB_VERSION "0.0.0"
#endif

namespace serrin::io {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::array<std::pair<Command, const char *>, 8> command_names{{
    {Command::solve, "solve"},
    {Command::diagnose, "diagnose"},
    {Command::sweep_sigma, "sweep-sigma"},
    {Command::sweep_inclusion, "sweep-inclusion"},
    {Command::sweep_stability, "sweep-stability"},
    {Command::frechet_check, "frechet-check"},
    {Command::verify_identity, "verify-identity"},
    {Command::nonexistence, "nonexistence"},
}};

std::string fmt(double x) {
  if (std::isnan(x))
    return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_field(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"')
      out += '"';
    out += ch;
  }
  return out + "\"";
}

// --- strict JSON readers ----------------------------------------------------

void reject_unknown(const json &j, const std::string &path, std::initializer_list<const char *> allowed) {
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto &[k, _] : j.items())
    if (!keys.count(k))
      throw ValidationError((path.empty() ? k : path + "." + k) + ": unknown field");
}

const json &require(const json &j, const std::string &key, const std::string &path) {
  if (!j.contains(key))
    throw ValidationError((path.empty() ? key : path + "." + key) + ": required");
  return j.at(key);
}

double number(const json &v, const std::string &field) {
  if (!v.is_number())
    throw ValidationError(field + ": must be a number");
  return v.get<double>();
}

int integer(const json &v, const std::string &field) {
  if (!v.is_number_integer())
    throw ValidationError(field + ": must be an integer");
  return v.get<int>();
}

bool boolean(const json &v, const std::string &field) {
  if (!v.is_boolean())
    throw ValidationError(field + ": must be true or false");
  return v.get<bool>();
}

std::string string(const json &v, const std::string &field) {
  if (!v.is_string())
    throw ValidationError(field + ": must be a string");
  return v.get<std::string>();
}

Vec2 point(const json &v, const std::string &field) {
  if (!v.is_array() || v.size() != 2)
    throw ValidationError(field + ": must be an array [x, y]");
  return {number(v[0], field + "[0]"), number(v[1], field + "[1]")};
}

std::vector<double> numbers(const json &v, const std::string &field) {
  if (!v.is_array())
    throw ValidationError(field + ": must be an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

json point_json(Vec2 p) { return json::array({p.x, p.y}); }

ShapeKind kind_field(const json &j, const std::string &path) {
  const std::string name = string(require(j, "kind", path), path + ".kind");
  try {
    return shape_kind_from_string(name);
  } catch (const ValidationError &) {
    throw ValidationError(path + ".kind: unknown kind '" + name + "'");
  }
}

/// Re-throws a validation error with the field path prefixed.
template <class F> void with_prefix(const std::string &prefix, F &&f) {
  try {
    f();
  } catch (const ValidationError &e) {
    throw ValidationError(prefix + ": " + e.what());
  }
}

} // namespace

// --- names ------------------------------------------------------------------

const char *to_string(Command c) {
  for (const auto &[cmd, name] : command_names)
    if (cmd == c)
      return name;
  return "diagnose";
}

Command command_from_string(const std::string &name) {
  for (const auto &[cmd, n] : command_names)
    if (name == n)
      return cmd;
  throw ValidationError("command: unknown command '" + name + "'");
}

// --- specs ------------------------------------------------------------------

json to_json(const DomainSpec &d) {
  json j;
  j["kind"] = serrin::to_string(d.kind);
  switch (d.kind) {
  case ShapeKind::disk:
    j["radius"] = d.radius;
    break;
  case ShapeKind::ellipse:
    j["a"] = d.a;
    j["b"] = d.b;
    break;
  case ShapeKind::star:
    j["r0"] = d.r0;
    j["epsilon"] = d.epsilon;
    j["mode"] = d.mode;
    break;
  case ShapeKind::polygon: {
    json v = json::array();
    for (auto p : d.vertices)
      v.push_back(point_json(p));
    j["vertices"] = v;
    break;
  }
  case ShapeKind::none:
    break;
  }
  if (d.kind != ShapeKind::polygon)
    j["center"] = point_json(d.center);
  j["boundary_samples"] = d.boundary_samples;
  return j;
}

DomainSpec domain_from_json(const json &j) {
  const std::string path = "domain";
  if (!j.is_object())
    throw ValidationError("domain: must be an object");
  const ShapeKind kind = kind_field(j, path);
  const Vec2 center = j.contains("center") ? point(j.at("center"), "domain.center") : Vec2{};
  DomainSpec d;
  switch (kind) {
  case ShapeKind::disk:
    reject_unknown(j, path, {"kind", "center", "radius", "boundary_samples"});
    d = DomainSpec::disk(number(require(j, "radius", path), "domain.radius"), center);
    break;
  case ShapeKind::ellipse:
    reject_unknown(j, path, {"kind", "center", "a", "b", "boundary_samples"});
    d = DomainSpec::ellipse(number(require(j, "a", path), "domain.a"), number(require(j, "b", path), "domain.b"),
                            center);
    break;
  case ShapeKind::star:
    reject_unknown(j, path, {"kind", "center", "r0", "epsilon", "mode", "boundary_samples"});
    d = DomainSpec::star(number(require(j, "r0", path), "domain.r0"),
                         number(require(j, "epsilon", path), "domain.epsilon"),
                         integer(require(j, "mode", path), "domain.mode"), center);
    break;
  case ShapeKind::polygon: {
    reject_unknown(j, path, {"kind", "vertices", "boundary_samples"});
    const json &v = require(j, "vertices", path);
    if (!v.is_array())
      throw ValidationError("domain.vertices: must be an array of points");
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < v.size(); ++i)
      pts.push_back(point(v[i], "domain.vertices[" + std::to_string(i) + "]"));
    d = DomainSpec::polygon(std::move(pts));
    break;
  }
  case ShapeKind::none:
    throw ValidationError("domain.kind: 'none' is not a domain");
  }
  if (j.contains("boundary_samples"))
    d.boundary_samples = integer(j.at("boundary_samples"), "domain.boundary_samples");
  with_prefix("domain", [&] { d.validate(); });
  return d;
}

json to_json(const InclusionSpec &s) {
  json j;
  j["kind"] = serrin::to_string(s.kind);
  if (s.kind == ShapeKind::disk)
    j["radius"] = s.radius;
  if (s.kind == ShapeKind::ellipse) {
    j["a"] = s.a;
    j["b"] = s.b;
  }
  if (s.kind != ShapeKind::none)
    j["center"] = point_json(s.center);
  return j;
}

InclusionSpec inclusion_from_json(const json &j) {
  const std::string path = "inclusion";
  if (!j.is_object())
    throw ValidationError("inclusion: must be an object");
  const ShapeKind kind = kind_field(j, path);
  const Vec2 center = j.contains("center") ? point(j.at("center"), "inclusion.center") : Vec2{};
  InclusionSpec s;
  switch (kind) {
  case ShapeKind::none:
    reject_unknown(j, path, {"kind"});
    break;
  case ShapeKind::disk:
    reject_unknown(j, path, {"kind", "center", "radius"});
    s = InclusionSpec::disk(number(require(j, "radius", path), "inclusion.radius"), center);
    break;
  case ShapeKind::ellipse:
    reject_unknown(j, path, {"kind", "center", "a", "b"});
    s = InclusionSpec::ellipse(number(require(j, "a", path), "inclusion.a"),
                               number(require(j, "b", path), "inclusion.b"), center);
    break;
  default:
    throw ValidationError("inclusion.kind: must be none, disk or ellipse");
  }
  with_prefix("inclusion", [&] { s.validate(); });
  return s;
}

// --- run config -------------------------------------------------------------

void RunConfig::validate() const {
  with_prefix("domain", [&] { domain.validate(); });
  with_prefix("inclusion", [&] { inclusion.validate(); });
  with_prefix("solver", [&] { solver.validate(); });
  if (!(target_h > 0) || !std::isfinite(target_h))
    throw ValidationError("target_h: must be positive");
  if (refinement_levels < 0 || refinement_levels > 4)
    throw ValidationError("refinement_levels: must lie in [0, 4]");
  if (window < 3)
    throw ValidationError("window: must be at least 3");
  if (!(sigma_c > 0) || !std::isfinite(sigma_c))
    throw ValidationError("sigma_c: must be positive");
  if (!inclusion.empty() && command != Command::sweep_stability && command != Command::sweep_inclusion)
    with_prefix("inclusion", [&] { inclusion_margin(domain, inclusion); });
  if (name.find('/') != std::string::npos || name == "." || name == "..")
    throw ValidationError("name: must be a plain directory name");

  auto need = [](const std::vector<double> &v, const char *field) {
    if (v.size() < 3)
      throw ValidationError(std::string(field) + ": need at least 3 values");
  };
  switch (command) {
  case Command::sweep_sigma:
    need(t_values, "t_values");
    for (double t : t_values)
      if (!(t > -1.0))
        throw ValidationError("t_values: sigma_c = 1 + t must stay positive (t > -1)");
    break;
  case Command::frechet_check:
    need(eps_values, "eps_values");
    if (!(t0 > -1.0))
      throw ValidationError("t0: must exceed -1");
    for (double e : eps_values)
      if (!(e > 0))
        throw ValidationError("eps_values: must be positive");
    break;
  case Command::sweep_inclusion:
    need(radii, "radii");
    if (inclusion.kind == ShapeKind::ellipse)
      throw ValidationError("inclusion.kind: sweep-inclusion takes a disk (its centre) or none");
    break;
  case Command::sweep_stability:
    need(family.values, "family.values");
    if (family.kind != "ellipse" && family.kind != "star")
      throw ValidationError("family.kind: must be ellipse or star");
    break;
  case Command::nonexistence:
    if (!fitted_c2)
      throw ValidationError("fitted_c2: required");
    if (!fitted_c3)
      throw ValidationError("fitted_c3: required");
    if (!(*fitted_c2 > 0) || !(*fitted_c3 > 0))
      throw ValidationError("fitted_c2/fitted_c3: must be positive");
    break;
  default:
    break;
  }
}

json to_json(const RunConfig &c) {
  json j;
  j["command"] = to_string(c.command);
  j["name"] = c.name;
  j["domain"] = to_json(c.domain);
  j["inclusion"] = to_json(c.inclusion);
  j["sigma_c"] = c.sigma_c;
  j["target_h"] = c.target_h;
  j["refinement_levels"] = c.refinement_levels;
  if (c.eta)
    j["eta"] = {{"amplitude", c.eta->amplitude}, {"mode", c.eta->mode}, {"phase", c.eta->phase}};
  j["t_values"] = c.t_values;
  j["eps_values"] = c.eps_values;
  j["radii"] = c.radii;
  j["t0"] = c.t0;
  j["family"] = {{"kind", c.family.kind}, {"values", c.family.values}, {"mode", c.family.mode}};
  if (c.fitted_c2)
    j["fitted_c2"] = *c.fitted_c2;
  if (c.fitted_c3)
    j["fitted_c3"] = *c.fitted_c3;
  j["window"] = c.window;
  j["solver"] = {{"cg_rel_tolerance", c.solver.cg_rel_tolerance},
                 {"cg_max_iterations", c.solver.cg_max_iterations},
                 {"diagonal_preconditioning", c.solver.diagonal_preconditioning}};
  j["output_dir"] = c.output_dir;
  j["plot"] = c.plot;
  return j;
}

RunConfig config_from_json(const json &j) {
  if (!j.is_object())
    throw ValidationError("config: must be a JSON object");
  reject_unknown(j, "",
                 {"command", "name", "domain", "inclusion", "sigma_c", "target_h", "refinement_levels", "eta",
                  "t_values", "eps_values", "radii", "t0", "family", "fitted_c2", "fitted_c3", "window", "solver",
                  "output_dir", "plot"});
  RunConfig c;
  c.command = command_from_string(string(require(j, "command", ""), "command"));
  if (j.contains("name"))
    c.name = string(j.at("name"), "name");
  if (j.contains("domain"))
    c.domain = domain_from_json(j.at("domain"));
  else if (c.command != Command::sweep_stability)
    throw ValidationError("domain: required");
  if (j.contains("inclusion"))
    c.inclusion = inclusion_from_json(j.at("inclusion"));
  if (j.contains("sigma_c"))
    c.sigma_c = number(j.at("sigma_c"), "sigma_c");
  if (j.contains("target_h"))
    c.target_h = number(j.at("target_h"), "target_h");
  if (j.contains("refinement_levels"))
    c.refinement_levels = integer(j.at("refinement_levels"), "refinement_levels");
  if (j.contains("eta")) {
    const json &e = j.at("eta");
    if (!e.is_object())
      throw ValidationError("eta: must be an object");
    reject_unknown(e, "eta", {"amplitude", "mode", "phase"});
    EtaSpec eta;
    eta.amplitude = number(require(e, "amplitude", "eta"), "eta.amplitude");
    if (e.contains("mode"))
      eta.mode = integer(e.at("mode"), "eta.mode");
    if (e.contains("phase"))
      eta.phase = number(e.at("phase"), "eta.phase");
    c.eta = eta;
  }
  if (j.contains("t_values"))
    c.t_values = numbers(j.at("t_values"), "t_values");
  if (j.contains("eps_values"))
    c.eps_values = numbers(j.at("eps_values"), "eps_values");
  if (j.contains("radii"))
    c.radii = numbers(j.at("radii"), "radii");
  if (j.contains("t0"))
    c.t0 = number(j.at("t0"), "t0");
  if (j.contains("family")) {
    const json &f = j.at("family");
    if (!f.is_object())
      throw ValidationError("family: must be an object");
    reject_unknown(f, "family", {"kind", "values", "mode"});
    if (f.contains("kind"))
      c.family.kind = string(f.at("kind"), "family.kind");
    c.family.values = numbers(require(f, "values", "family"), "family.values");
    if (f.contains("mode"))
      c.family.mode = integer(f.at("mode"), "family.mode");
  }
  if (j.contains("fitted_c2"))
    c.fitted_c2 = number(j.at("fitted_c2"), "fitted_c2");
  if (j.contains("fitted_c3"))
    c.fitted_c3 = number(j.at("fitted_c3"), "fitted_c3");
  if (j.contains("window")) {
    const int w = integer(j.at("window"), "window");
    if (w < 3)
      throw ValidationError("window: must be at least 3");
    c.window = static_cast<std::size_t>(w);
  }
  if (j.contains("solver")) {
    const json &s = j.at("solver");
    if (!s.is_object())
      throw ValidationError("solver: must be an object");
    reject_unknown(s, "solver", {"cg_rel_tolerance", "cg_max_iterations", "diagonal_preconditioning"});
    if (s.contains("cg_rel_tolerance"))
      c.solver.cg_rel_tolerance = number(s.at("cg_rel_tolerance"), "solver.cg_rel_tolerance");
    if (s.contains("cg_max_iterations"))
      c.solver.cg_max_iterations = integer(s.at("cg_max_iterations"), "solver.cg_max_iterations");
    if (s.contains("diagonal_preconditioning"))
      c.solver.diagonal_preconditioning = boolean(s.at("diagonal_preconditioning"), "solver.diagonal_preconditioning");
  }
  if (j.contains("output_dir"))
    c.output_dir = string(j.at("output_dir"), "output_dir");
  if (j.contains("plot"))
    c.plot = boolean(j.at("plot"), "plot");
  c.validate();
  return c;
}

RunConfig load_config(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ValidationError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error &e) {
    throw ValidationError(std::string("config: JSON parse error: ") + e.what());
  }
  return config_from_json(j);
}

// --- tabular output ---------------------------------------------------------

const std::vector<std::string> &report_columns() {
  static const std::vector<std::string> cols{"c",     "dev_L2", "dev_Linf", "z_x",    "z_y",    "rho_i",      "rho_e",
                                             "gap",   "osc_h",  "FI_lhs",   "FI_rhs", "FI_gap", "growth_min", "h_max"};
  return cols;
}

void write_report_csv(std::ostream &out, const std::vector<SerrinReport> &rows) {
  const auto &cols = report_columns();
  for (std::size_t i = 0; i < cols.size(); ++i)
    out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto &r : rows) {
    const double v[] = {r.c,     r.deviation_l2, r.deviation_linf, r.z.x,           r.z.y,
                        r.rho_i, r.rho_e,        r.gap,            r.osc_h,         r.fi_lhs,
                        r.fi_rhs, r.fi_relative_gap, r.growth_ratio_min, r.h_max};
    for (std::size_t i = 0; i < std::size(v); ++i)
      out << (i ? "," : "") << fmt(v[i]);
    out << '\n';
  }
}

void write_sweep_csv(std::ostream &out, const SweepResult &sweep) {
  out << "parameter";
  for (const auto &c : sweep.columns)
    out << ',' << c;
  out << ",in_fit,flag\n";
  for (const auto &row : sweep.rows) {
    out << fmt(row.parameter);
    for (const auto &c : sweep.columns) {
      out << ',';
      const auto it = row.metrics.find(c);
      if (it != row.metrics.end())
        out << fmt(it->second);
    }
    out << ',' << (row.in_fit ? 1 : 0) << ',' << csv_field(row.flag) << '\n';
  }
}

json fit_json(const SweepResult &sweep) {
  json j;
  j["kind"] = to_string(sweep.kind);
  j["status"] = sweep.status;
  j["x"] = sweep.fit_x;
  j["y"] = sweep.fit_y;
  j["window"] = sweep.window;
  j["ok"] = sweep.fit.ok;
  j["fit_status"] = sweep.fit.status;
  j["slope"] = sweep.fit.ok ? json(sweep.fit.slope) : json(nullptr);
  j["intercept"] = sweep.fit.ok ? json(sweep.fit.intercept) : json(nullptr);
  j["r2"] = sweep.fit.ok ? json(sweep.fit.r2) : json(nullptr);
  j["used_rows"] = sweep.fit.used;
  j["excluded_rows"] = sweep.fit.excluded;
  json constants = json::object();
  for (const auto &[k, v] : sweep.constants)
    constants[k] = std::isfinite(v) ? json(v) : json(nullptr);
  j["constants"] = constants;
  j["h_max"] = sweep.h_max;
  return j;
}

void write_field(std::ostream &out, const Mesh &mesh, const Field &f) {
  require_same_mesh(mesh, f, "write_field");
  write_mesh(out, mesh);
  out << "VALUES " << f.values.size() << ' ' << to_string(f.label) << '\n';
  for (double v : f.values)
    out << fmt(v) << '\n';
}

// --- plot -------------------------------------------------------------------

std::string render_plot(const SweepResult &sweep) {
  struct P {
    double x, y;
    bool in_fit;
  };
  std::vector<P> pts;
  for (const auto &row : sweep.rows) {
    const auto ix = row.metrics.find(sweep.fit_x);
    const auto iy = row.metrics.find(sweep.fit_y);
    if (ix == row.metrics.end() || iy == row.metrics.end())
      continue;
    if (ix->second > 0 && iy->second > 0 && std::isfinite(ix->second) && std::isfinite(iy->second))
      pts.push_back({std::log10(ix->second), std::log10(iy->second), row.in_fit});
  }
  if (pts.size() < 2)
    return {};

  constexpr double W = 640, H = 480, L = 80, R = 30, T = 40, B = 60;
  double x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
  for (const auto &p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double padx = std::max(0.05 * (x1 - x0), 0.1), pady = std::max(0.05 * (y1 - y0), 0.1);
  x0 -= padx;
  x1 += padx;
  y0 -= pady;
  y1 += pady;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::string s;
  char buf[256];
  auto add = [&](const char *f, auto... args) {
    std::snprintf(buf, sizeof buf, f, args...);
    s += buf;
  };
  add("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n", W, H,
      W, H);
  add("<rect x=\"0\" y=\"0\" width=\"%.0f\" height=\"%.0f\" fill=\"white\"/>\n", W, H);
  add("<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n", L, T,
      W - L - R, H - T - B);
  for (int d = static_cast<int>(std::ceil(x0)); d <= static_cast<int>(std::floor(x1)); ++d) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n", sx(d), T, sx(d), H - B);
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">1e%d</text>\n", sx(d), H - B + 18, d);
  }
  for (int d = static_cast<int>(std::ceil(y0)); d <= static_cast<int>(std::floor(y1)); ++d) {
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#dddddd\"/>\n", L, sy(d), W - R, sy(d));
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"end\">1e%d</text>\n", L - 6, sy(d) + 4, d);
  }
  add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" text-anchor=\"middle\">%s</text>\n", (L + W - R) / 2, H - 15,
      sweep.fit_x.c_str());
  add("<text x=\"20\" y=\"%.2f\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 %.2f)\">%s</text>\n",
      (T + H - B) / 2, (T + H - B) / 2, sweep.fit_y.c_str());
  add("<text x=\"%.2f\" y=\"25\" font-size=\"15\" text-anchor=\"middle\">%s sweep</text>\n", W / 2,
      to_string(sweep.kind));

  if (sweep.fit.ok) {
    double a = x1, b = x0;
    for (const auto &p : pts)
      if (p.in_fit) {
        a = std::min(a, p.x);
        b = std::max(b, p.x);
      }
    if (a > b) {
      a = x0 + padx;
      b = x1 - padx;
    }
    const double l10 = std::log(10.0);
    auto line_y = [&](double x) { return (sweep.fit.intercept + sweep.fit.slope * x * l10) / l10; };
    add("<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#d62728\" stroke-width=\"2\"/>\n", sx(a),
        sy(line_y(a)), sx(b), sy(line_y(b)));
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\" fill=\"#d62728\">slope=%.2f</text>\n", L + 10, T + 20,
        sweep.fit.slope);
  } else {
    add("<text x=\"%.2f\" y=\"%.2f\" font-size=\"14\">slope=n/a</text>\n", L + 10, T + 20);
  }
  for (const auto &p : pts)
    add("<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" stroke=\"#1f77b4\" fill=\"%s\"/>\n", sx(p.x), sy(p.y),
        p.in_fit ? "#1f77b4" : "none");
  s += "</svg>\n";
  return s;
}

bool emit_plot(const SweepResult &sweep, const fs::path &path) {
  const std::string svg = render_plot(sweep);
  if (svg.empty())
    return false;
  std::ofstream out(path, std::ios::binary);
  out << svg;
  return static_cast<bool>(out);
}

// --- run --------------------------------------------------------------------

namespace {

struct Context {
  const RunConfig &config;
  const RunOptions &options;
  fs::path dir;
  std::vector<std::string> outputs;
  std::vector<std::string> warnings;

  std::ofstream open(const std::string &file) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write " + (dir / file).string());
    outputs.push_back(file);
    return out;
  }
  void log(const std::string &msg) const {
    if (options.log)
      *options.log << msg << '\n';
  }
};

std::vector<Mesh> mesh_levels(const RunConfig &c) {
  std::vector<Mesh> meshes{generate(c.domain, c.inclusion, c.target_h)};
  for (int l = 0; l < c.refinement_levels; ++l)
    meshes.push_back(refine(meshes.back()));
  return meshes;
}

SweepOptions sweep_options(const Context &ctx) {
  SweepOptions o;
  o.target_h = ctx.config.target_h;
  o.window = ctx.config.window;
  o.jobs = ctx.options.jobs;
  o.solver = ctx.config.solver;
  return o;
}

void run_solve(Context &ctx) {
  const auto &c = ctx.config;
  const auto meshes = mesh_levels(c);
  auto out = ctx.open("report.csv");
  out << "level,h_max,vertices,triangles,cg_iterations,cg_relative_residual,center_value,flux_integral,mesh_area\n";
  for (std::size_t l = 0; l < meshes.size(); ++l) {
    const Mesh &m = meshes[l];
    const Field u = solve_two_phase(m, c.sigma_c, c.solver);
    const BoundaryTrace tr = normal_derivative(m, u, c.sigma_c);
    out << l << ',' << fmt(m.h_max) << ',' << m.vertices.size() << ',' << m.triangles.size() << ','
        << u.cg_iterations << ',' << fmt(u.cg_relative_residual) << ','
        << fmt(evaluate(m, u, Curve(c.domain).center())) << ',' << fmt(tr.integral()) << ',' << fmt(m.area())
        << '\n';
    if (l + 1 == meshes.size()) {
      auto field = ctx.open("field.txt");
      write_field(field, m, u);
    }
  }
}

void run_diagnose(Context &ctx) {
  std::vector<SerrinReport> rows;
  for (const Mesh &m : mesh_levels(ctx.config))
    rows.push_back(report_on_mesh(m, ctx.config.sigma_c, ctx.config.eta, ctx.config.solver));
  auto out = ctx.open("report.csv");
  write_report_csv(out, rows);
}

void run_identity(Context &ctx) {
  auto out = ctx.open("report.csv");
  out << "level,h_max,FI_lhs,FI_rhs,FI_gap,osc_h,osc_residual,osc_slack,growth_min,growth_quadratic_slack,"
         "dev_L2,dev_Linf,perimeter\n";
  RunConfig one_phase = ctx.config;
  one_phase.inclusion = InclusionSpec::none();
  std::size_t level = 0;
  for (const Mesh &m : mesh_levels(one_phase)) {
    const auto r = report_on_mesh(m, 1.0, {}, ctx.config.solver);
    out << level++ << ',' << fmt(r.h_max) << ',' << fmt(r.fi_lhs) << ',' << fmt(r.fi_rhs) << ','
        << fmt(r.fi_relative_gap) << ',' << fmt(r.osc_h) << ',' << fmt(r.osc_identity_residual) << ','
        << fmt(r.osc_inequality_slack) << ',' << fmt(r.growth_ratio_min) << ',' << fmt(r.growth_quadratic_slack)
        << ',' << fmt(r.deviation_l2) << ',' << fmt(r.deviation_linf) << ',' << fmt(r.perimeter) << '\n';
  }
}

void write_sweep(Context &ctx, const SweepResult &sweep) {
  {
    auto out = ctx.open("report.csv");
    write_sweep_csv(out, sweep);
  }
  {
    auto out = ctx.open("fit.json");
    out << fit_json(sweep).dump(2) << '\n';
  }
  if (ctx.config.plot || ctx.options.plot) {
    if (emit_plot(sweep, ctx.dir / "plot.svg"))
      ctx.outputs.push_back("plot.svg");
    else
      ctx.warnings.push_back("plot skipped: fewer than two positive points");
  }
  if (sweep.status.rfind("partial", 0) == 0)
    throw SolverError("sweep aborted: " + sweep.status, std::numeric_limits<double>::quiet_NaN());
}

void run_nonexistence(Context &ctx) {
  const auto &c = ctx.config;
  const auto r = nonexistence_threshold(c.domain, *c.fitted_c2, *c.fitted_c3, c.target_h, c.solver);
  auto out = ctx.open("report.csv");
  out << "gap,fitted_C2,fitted_C3,sigma_threshold,area_threshold,label\n";
  out << fmt(r.gap) << ',' << fmt(r.fitted_c2) << ',' << fmt(r.fitted_c3) << ',' << fmt(r.sigma_threshold) << ','
      << fmt(r.area_threshold) << ',' << csv_field(r.label) << '\n';
}

void dispatch(Context &ctx) {
  const auto &c = ctx.config;
  switch (c.command) {
  case Command::solve:
    run_solve(ctx);
    break;
  case Command::diagnose:
    run_diagnose(ctx);
    break;
  case Command::verify_identity:
    run_identity(ctx);
    break;
  case Command::sweep_sigma:
    write_sweep(ctx, sigma_sweep(c.domain, c.inclusion, c.t_values, sweep_options(ctx)));
    break;
  case Command::sweep_inclusion: {
    const Vec2 center = c.inclusion.empty() ? Curve(c.domain).center() : c.inclusion.center;
    write_sweep(ctx, inclusion_sweep(c.domain, c.sigma_c, c.radii, center, sweep_options(ctx)));
    break;
  }
  case Command::sweep_stability: {
    auto family = c.family.kind == "star" ? star_family(c.family.values, c.family.mode)
                                          : ellipse_family(c.family.values);
    write_sweep(ctx, one_phase_stability_sweep(std::move(family), sweep_options(ctx)));
    break;
  }
  case Command::frechet_check:
    write_sweep(ctx, frechet_check(c.domain, c.inclusion, c.t0, c.eps_values, sweep_options(ctx)));
    break;
  case Command::nonexistence:
    run_nonexistence(ctx);
    break;
  }
}

void write_manifest(const Context &ctx, const RunOutcome &outcome, double wall_time) {
  json m;
  m["tool"] = "serrin-lab";
  m["version"] = SERRIN_LAB_VERSION;
  m["command"] = to_string(ctx.config.command);
  m["config"] = to_json(ctx.config);
  m["status"] = outcome.exit_code == 0 ? "ok" : "failed";
  m["exit_code"] = outcome.exit_code;
  m["failure_reason"] = outcome.exit_code == 0 ? json(nullptr) : json(outcome.message);
  m["outputs"] = ctx.outputs;
  m["warnings"] = ctx.warnings;
  m["wall_time_seconds"] = wall_time;
  std::ofstream out(ctx.dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
}

fs::path output_root(const RunConfig &config, const RunOptions &options) {
  return options.output_root ? *options.output_root : fs::path(config.output_dir);
}

// A config that parses as JSON but fails validation still gets a manifest
// when its command and output location can be read.
std::optional<fs::path> failed_config_dir(const fs::path &config_path, const RunOptions &options) {
  std::ifstream in(config_path);
  const json j = json::parse(in, nullptr, false);
  if (!j.is_object() || !j.contains("command") || !j.at("command").is_string())
    return std::nullopt;
  try {
    command_from_string(j.at("command").get<std::string>());
  } catch (const ValidationError &) {
    return std::nullopt;
  }
  std::string name = j.at("command").get<std::string>();
  if (j.contains("name") && j.at("name").is_string() && !j.at("name").get<std::string>().empty())
    name = j.at("name").get<std::string>();
  fs::path root = "outputs";
  if (options.output_root)
    root = *options.output_root;
  else if (j.contains("output_dir") && j.at("output_dir").is_string())
    root = j.at("output_dir").get<std::string>();
  return root / name;
}

void write_rejection_manifest(const fs::path &dir, const fs::path &config_path, const RunOutcome &outcome) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    return;
  std::ifstream in(config_path);
  json m;
  m["tool"] = "serrin-lab";
  m["version"] = SERRIN_LAB_VERSION;
  m["config"] = json::parse(in, nullptr, false);
  m["command"] = m["config"].at("command");
  m["status"] = "failed";
  m["exit_code"] = outcome.exit_code;
  m["failure_reason"] = outcome.message;
  m["outputs"] = json::array();
  m["warnings"] = json::array();
  m["wall_time_seconds"] = 0.0;
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
}

} // namespace

RunOutcome run(const RunConfig &config, const RunOptions &options) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{config, options, output_root(config, options) / config.output_name(), {}, {}};
  RunOutcome outcome;
  outcome.directory = ctx.dir;
  try {
    fs::create_directories(ctx.dir);
  } catch (const std::exception &e) {
    outcome.exit_code = 1;
    outcome.message = std::string("output: ") + e.what();
    ctx.log("error: " + outcome.message);
    return outcome;
  }
  try {
    config.validate();
    dispatch(ctx);
  } catch (const ValidationError &e) {
    outcome.exit_code = 2;
    outcome.message = e.what();
  } catch (const SolverError &e) {
    outcome.exit_code = 3;
    outcome.message = e.what();
  } catch (const std::exception &e) {
    outcome.exit_code = 1;
    outcome.message = e.what();
  }
  for (const auto &w : ctx.warnings)
    ctx.log("warning: " + w);
  if (outcome.exit_code != 0)
    ctx.log("error: " + outcome.message);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(ctx, outcome, wall);
  return outcome;
}

RunOutcome run_file(const fs::path &config_path, const std::optional<std::string> &expected_command,
                    const RunOptions &options) {
  RunConfig config;
  try {
    config = load_config(config_path);
    if (expected_command && *expected_command != to_string(config.command))
      throw ValidationError("command: '" + *expected_command + "' given on the command line but the config says '" +
                            to_string(config.command) + "'");
  } catch (const ValidationError &e) {
    if (options.log)
      *options.log << "error: " << e.what() << '\n';
    RunOutcome outcome{2, e.what(), {}};
    if (const auto dir = failed_config_dir(config_path, options)) {
      outcome.directory = *dir;
      write_rejection_manifest(*dir, config_path, outcome);
    }
    return outcome;
  }
  return run(config, options);
}

} // namespace serrin::io
