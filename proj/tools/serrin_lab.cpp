// serrin-lab <command> --config <path> [--jobs N] [--plot]

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "serrin/cli_io.hpp"
#include "serrin/error.hpp"

int main(int argc, char **argv) {
  CLI::App app{"Two-phase torsion FEM laboratory and Serrin-type stability diagnostics"};
  std::string command;
  std::string config_path;
  unsigned jobs = 0;
  bool plot = false;
  app.add_option("command", command,
                 "solve | diagnose | sweep-sigma | sweep-inclusion | sweep-stability | frechet-check | "
                 "verify-identity | nonexistence")
      ->required();
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--jobs", jobs, "concurrent sweep members (default: available cores)");
  app.add_flag("--plot", plot, "write plot.svg for sweeps");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return 2;
  }

  try {
    serrin::io::command_from_string(command);
  } catch (const serrin::ValidationError &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  serrin::io::RunOptions options;
  options.jobs = jobs;
  options.plot = plot;
  options.log = &std::cerr;
  if (const char *root = std::getenv("SERRIN_LAB_OUT"); root && *root)
    options.output_root = root;

  const auto outcome = serrin::io::run_file(config_path, command, options);
  if (outcome.exit_code == 0)
    std::cout << outcome.directory.string() << '\n';
  return outcome.exit_code;
}
