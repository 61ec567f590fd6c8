#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "serrin/cli_io.hpp"
#include "serrin/error.hpp"

using namespace serrin;
using namespace serrin::io;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("serrin_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path write_config(const fs::path &dir, const json &j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Exec {
  int code = -1;
  std::string err;
};

Exec cli(const std::string &args, const fs::path &out_root) {
  const fs::path err = out_root / "stderr.txt";
  const std::string cmd = "SERRIN_LAB_OUT='" + out_root.string() + "' '" SERRIN_LAB_EXE "' " + args + " >/dev/null 2>'" +
                          err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path &p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  std::vector<std::string> header;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');)
    header.push_back(cell);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    std::stringstream ls(line);
    std::map<std::string, std::string> row;
    std::size_t k = 0;
    for (std::string cell; std::getline(ls, cell, ',') && k < header.size(); ++k)
      row[header[k]] = cell;
    rows.push_back(row);
  }
  return rows;
}

} // namespace

TEST_CASE("config round trip") {
  RunConfig c;
  c.command = Command::sweep_sigma;
  c.name = "rt";
  c.domain = DomainSpec::ellipse(1.2, 1.0);
  c.inclusion = InclusionSpec::disk(0.3, {0.1, 0.0});
  c.sigma_c = 2.5;
  c.target_h = 0.04;
  c.refinement_levels = 2;
  c.eta = EtaSpec{0.01, 2, 0.5};
  c.t_values = {0.4, 0.2, 0.1};
  c.eps_values = {0.1, 0.05, 0.025};
  c.radii = {0.3, 0.2, 0.1};
  c.t0 = 0.5;
  c.family = {"star", {0.1, 0.05, 0.02}, 5};
  c.fitted_c2 = 1.5;
  c.fitted_c3 = 0.7;
  c.window = 3;
  c.solver.cg_rel_tolerance = 1e-11;
  c.plot = true;
  CHECK(config_from_json(to_json(c)) == c);
  CHECK(config_from_json(json::parse(to_json(c).dump())) == c);
  RunConfig star;
  star.domain = DomainSpec::star(1.0, 0.05, 3);
  CHECK(config_from_json(to_json(star)) == star);
}

TEST_CASE("strict config parsing") {
  try {
    config_from_json(json{{"domain", {{"kind", "disk"}, {"radius", 1.0}}}});
    FAIL("expected a validation error");
  } catch (const ValidationError &e) {
    CHECK(std::string(e.what()) == "command: required");
  }
  CHECK_THROWS_WITH_AS(config_from_json(json{{"command", "bogus"}}), doctest::Contains("command"), ValidationError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"command", "solve"}, {"sigmac", 2.0}}), doctest::Contains("sigmac"),
                       ValidationError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"command", "solve"}, {"domain", {{"kind", "disk"}, {"r", 1.0}}}}),
                       doctest::Contains("domain"), ValidationError);
  CHECK_THROWS_WITH_AS(config_from_json(json{{"command", "solve"}, {"domain", {{"kind", "disk"}, {"radius", 1.0}}}, {"target_h", "small"}}),
                       doctest::Contains("target_h"), ValidationError);
}

TEST_CASE("diagnose example") {
  const fs::path dir = scratch("diagnose");
  RunOptions opt;
  opt.output_root = dir;
  const auto c = config_from_json(json::parse(
      R"({"command":"diagnose","domain":{"kind":"ellipse","a":1.2,"b":1.0},"inclusion":{"kind":"none"},"target_h":0.05})"));
  const auto out = run(c, opt);
  REQUIRE(out.exit_code == 0);
  const auto rows = read_csv(out.directory / "report.csv");
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(std::stod(rows[0].at("gap")) - 0.2) <= 1e-3);
  CHECK(std::stod(rows[0].at("FI_gap")) <= 0.05);
  const auto manifest = json::parse(slurp(out.directory / "manifest.json"));
  CHECK(manifest.at("status") == "ok");
  CHECK(config_from_json(manifest.at("config")) == c);
  CHECK(manifest.contains("wall_time_seconds"));
  CHECK(manifest.at("version").is_string());
}

TEST_CASE("solve example through the executable") {
  const fs::path dir = scratch("solve");
  const auto cfg = write_config(dir, json::parse(R"({"command":"solve","name":"solve_concentric",
      "domain":{"kind":"disk","radius":1.0},"inclusion":{"kind":"disk","radius":0.5},"sigma_c":2,"target_h":0.05})"));
  const auto r = cli("solve --config '" + cfg.string() + "'", dir);
  REQUIRE(r.code == 0);
  const auto rows = read_csv(dir / "solve_concentric" / "report.csv");
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(std::stod(rows[0].at("center_value")) - 0.21875) <= 5e-4);
  const std::string field = slurp(dir / "solve_concentric" / "field.txt");
  CHECK(field.find("VALUES") != std::string::npos);
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  SUBCASE("missing command") {
    const auto cfg = write_config(dir, json{{"domain", {{"kind", "disk"}, {"radius", 1.0}}}});
    const auto r = cli("diagnose --config '" + cfg.string() + "'", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("command: required") != std::string::npos);
  }
  SUBCASE("unknown command") {
    const auto cfg = write_config(dir, json{{"command", "diagnose"}});
    CHECK(cli("explode --config '" + cfg.string() + "'", dir).code == 2);
    const auto bad = write_config(dir, json{{"command", "explode"}});
    const auto r = cli("diagnose --config '" + bad.string() + "'", dir);
    CHECK(r.code == 2);
    CHECK(r.err.find("command") != std::string::npos);
  }
  SUBCASE("validation failure after parsing still writes a manifest") {
    const auto cfg = write_config(dir, json{{"command", "diagnose"},
                                            {"name", "bad_h"},
                                            {"domain", {{"kind", "disk"}, {"radius", 1.0}}},
                                            {"target_h", -1.0}});
    CHECK(cli("diagnose --config '" + cfg.string() + "'", dir).code == 2);
    const auto m = json::parse(slurp(dir / "bad_h" / "manifest.json"));
    CHECK(m.at("exit_code") == 2);
    CHECK(m.at("failure_reason").get<std::string>().find("target_h") != std::string::npos);
  }
  SUBCASE("solver failure writes a manifest with the reason") {
    const auto cfg = write_config(dir, json{{"command", "solve"},
                                            {"name", "starved"},
                                            {"domain", {{"kind", "disk"}, {"radius", 1.0}}},
                                            {"inclusion", {{"kind", "disk"}, {"radius", 0.5}}},
                                            {"sigma_c", 2.0},
                                            {"target_h", 0.02},
                                            {"solver", {{"cg_max_iterations", 100}, {"cg_rel_tolerance", 1e-14}}}});
    CHECK(cli("solve --config '" + cfg.string() + "'", dir).code == 3);
    const auto m = json::parse(slurp(dir / "starved" / "manifest.json"));
    CHECK(m.at("status") == "failed");
    CHECK(m.at("exit_code") == 3);
    CHECK_FALSE(m.at("failure_reason").get<std::string>().empty());
  }
  SUBCASE("missing config file") {
    CHECK(cli("diagnose --config '" + (dir / "absent.json").string() + "'", dir).code == 2);
    CHECK(cli("diagnose", dir).code == 2);
  }
}

TEST_CASE("plot rendering") {
  SweepResult s;
  s.kind = SweepKind::sigma;
  s.columns = {"y"};
  s.fit_x = "x";
  s.fit_y = "y";
  std::vector<double> x, y;
  for (double t : {0.4, 0.2, 0.1, 0.05}) {
    SweepRow row;
    row.parameter = t;
    row.metrics["x"] = t;
    row.metrics["y"] = 2 * t;
    row.in_fit = true;
    s.rows.push_back(row);
    x.push_back(t);
    y.push_back(2 * t);
  }
  s.fit = slope_fit(x, y);
  const std::string svg = render_plot(s);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("slope=1.00") != std::string::npos);
  CHECK(render_plot(s) == svg);

  const fs::path dir = scratch("plot");
  CHECK(emit_plot(s, dir / "a.svg"));
  SweepResult empty = s;
  for (auto &row : empty.rows)
    row.metrics["y"] = 0.0;
  CHECK_FALSE(emit_plot(empty, dir / "b.svg"));
  CHECK_FALSE(fs::exists(dir / "b.svg"));
}

TEST_CASE("empty sweep warns and still succeeds") {
  const fs::path dir = scratch("empty");
  RunConfig c;
  c.command = Command::sweep_sigma;
  c.name = "degenerate";
  c.domain = DomainSpec::disk(1.0);
  c.inclusion = InclusionSpec::none();
  c.t_values = {0.4, 0.2, 0.1};
  c.target_h = 0.1;
  c.plot = true;
  RunOptions opt;
  opt.output_root = dir;
  const auto out = run(c, opt);
  CHECK(out.exit_code == 0);
  CHECK_FALSE(fs::exists(out.directory / "plot.svg"));
  const auto m = json::parse(slurp(out.directory / "manifest.json"));
  REQUIRE(m.at("warnings").size() == 1);
  CHECK(m.at("warnings")[0].get<std::string>().find("plot") != std::string::npos);
  const auto fit = json::parse(slurp(out.directory / "fit.json"));
  CHECK(fit.dump().find("degenerate") != std::string::npos);
}

TEST_CASE("SERRIN_LAB_OUT redirects output and reruns are byte-identical") {
  const fs::path dir = scratch("rerun");
  const auto cfg = write_config(dir, json::parse(R"({"command":"sweep-sigma","name":"sig",
      "domain":{"kind":"ellipse","a":1.2,"b":1.0},"inclusion":{"kind":"disk","radius":0.3},
      "t_values":[0.4,0.2,0.1,0.05],"target_h":0.08,"output_dir":"/nonexistent/never"})"));
  REQUIRE(cli("sweep-sigma --plot --config '" + cfg.string() + "'", dir).code == 0);
  const std::string csv = slurp(dir / "sig" / "report.csv");
  const std::string fit = slurp(dir / "sig" / "fit.json");
  const std::string svg = slurp(dir / "sig" / "plot.svg");
  auto manifest = json::parse(slurp(dir / "sig" / "manifest.json"));
  REQUIRE(cli("sweep-sigma --plot --jobs 1 --config '" + cfg.string() + "'", dir).code == 0);
  CHECK(slurp(dir / "sig" / "report.csv") == csv);
  CHECK(slurp(dir / "sig" / "fit.json") == fit);
  CHECK(slurp(dir / "sig" / "plot.svg") == svg);
  auto again = json::parse(slurp(dir / "sig" / "manifest.json"));
  manifest.erase("wall_time_seconds");
  again.erase("wall_time_seconds");
  CHECK(manifest == again);
}
