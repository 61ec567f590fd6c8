#pragma once

// Batch runs: JSON config in; CSV, JSON and SVG artifacts out.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "serrin/experiments.hpp"

namespace serrin::io {

enum class Command {
  solve,
  diagnose,
  sweep_sigma,
  sweep_inclusion,
  sweep_stability,
  frechet_check,
  verify_identity,
  nonexistence
};

const char *to_string(Command c);
/// Throws ValidationError naming the "command" field.
Command command_from_string(const std::string &name);

struct FamilyConfig {
  /// "ellipse" (a = 1 + e, b = 1) or "star" (r0 = 1, epsilon = e).
  std::string kind = "ellipse";
  std::vector<double> values;
  int mode = 3;

  bool operator==(const FamilyConfig &) const = default;
};

struct RunConfig {
  Command command = Command::diagnose;
  /// Output subdirectory; defaults to the command name.
  std::string name;
  DomainSpec domain;
  InclusionSpec inclusion;
  double sigma_c = 1.0;
  double target_h = 0.05;
  int refinement_levels = 0;
  std::optional<EtaSpec> eta;
  std::vector<double> t_values;
  std::vector<double> eps_values;
  std::vector<double> radii;
  double t0 = 0.0;
  FamilyConfig family;
  std::optional<double> fitted_c2;
  std::optional<double> fitted_c3;
  std::size_t window = 4;
  SolverConfig solver;
  std::string output_dir = "outputs";
  bool plot = false;

  /// Throws ValidationError naming the offending field.
  void validate() const;
  std::string output_name() const { return name.empty() ? to_string(command) : name; }

  bool operator==(const RunConfig &) const = default;
};

nlohmann::json to_json(const RunConfig &c);
/// Strict: unknown keys and wrong types are validation errors.
RunConfig config_from_json(const nlohmann::json &j);
RunConfig load_config(const std::filesystem::path &path);

nlohmann::json to_json(const DomainSpec &d);
nlohmann::json to_json(const InclusionSpec &d);
DomainSpec domain_from_json(const nlohmann::json &j);
InclusionSpec inclusion_from_json(const nlohmann::json &j);

/// Column names of a SerrinReport row.
const std::vector<std::string> &report_columns();
void write_report_csv(std::ostream &out, const std::vector<SerrinReport> &rows);
void write_sweep_csv(std::ostream &out, const SweepResult &sweep);
nlohmann::json fit_json(const SweepResult &sweep);
/// Mesh dump followed by a VALUES section.
void write_field(std::ostream &out, const Mesh &mesh, const Field &f);

/// Log-log scatter with the fitted line. Returns false (and writes nothing)
/// when fewer than two points are positive.
bool emit_plot(const SweepResult &sweep, const std::filesystem::path &path);
std::string render_plot(const SweepResult &sweep);

struct RunOptions {
  unsigned jobs = 0;
  bool plot = false;
  /// Overrides config.output_dir when set (SERRIN_LAB_OUT).
  std::optional<std::filesystem::path> output_root;
  std::ostream *log = nullptr;
};

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::filesystem::path directory;
};

/// Executes the config and writes its artifacts. Never throws for
/// validation or solver failures; they map to exit codes 2 and 3.
RunOutcome run(const RunConfig &config, const RunOptions &options);

/// Parses and runs a config file; validation failures while loading also
/// map to exit code 2 (manifest written when the output location is known).
RunOutcome run_file(const std::filesystem::path &config_path, const std::optional<std::string> &expected_command,
                    const RunOptions &options);

} // namespace serrin::io
