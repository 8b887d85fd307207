// Command-line front end for the takdual workbench. Everything substantive
// lives behind the C API of the shared library; this binary only parses
// flags, reads the scenario file, and writes the report.

#include "takdual.h"

#include "CLI11.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

std::string split_help() {
  std::string cmds(td_commands());
  return "one of: " + cmds;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"takdual: finite-dimensional measurement and duality workbench"};
  app.set_version_flag("--version", std::string(td_version()));

  std::string command, scenario_path, output_path;
  std::string format = "json";
  double tolerance = 0.0;
  std::uint64_t seed = 0;
  bool quiet = false;

  app.add_option("command", command, split_help())->required();
  app.add_option("scenario", scenario_path, "path to the scenario JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* tol_opt = app.add_option("--tolerance", tolerance,
                                 "numerical tolerance override (default 1e-9)");
  auto* seed_opt = app.add_option("--seed", seed, "random seed override (default 0)");
  app.add_option("--output", output_path, "write the report to this path");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json"}));
  app.add_flag("--quiet", quiet, "suppress the report on stdout");

  CLI11_PARSE(app, argc, argv);

  std::ifstream in(scenario_path);
  if (!in) {
    std::cerr << "cannot read scenario file: " << scenario_path << "\n";
    return static_cast<int>(TD_PARSE_ERROR);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();

  td_workbench* wb = td_workbench_new();
  if (!wb) {
    std::cerr << "out of memory\n";
    return static_cast<int>(TD_INTERNAL_ERROR);
  }
  if (tol_opt->count() > 0) td_workbench_set_tolerance(wb, tolerance);
  if (seed_opt->count() > 0) td_workbench_set_seed(wb, seed);

  td_report* report = nullptr;
  td_status status = td_run(wb, command.c_str(), buffer.str().c_str(), &report);
  if (!report) {
    std::cerr << "error: " << td_last_error(wb) << "\n";
    td_workbench_free(wb);
    return static_cast<int>(status);
  }

  const std::string json(td_report_json(report));
  if (!output_path.empty()) {
    std::ofstream out(output_path);
    if (!out) {
      std::cerr << "cannot write report to " << output_path << "\n";
      td_report_free(report);
      td_workbench_free(wb);
      return static_cast<int>(TD_INTERNAL_ERROR);
    }
    out << json << "\n";
    if (!quiet) std::cout << "report written to " << output_path << "\n";
  } else if (!quiet) {
    std::cout << json << "\n";
  }

  const int exit_code = static_cast<int>(td_report_status(report));
  td_report_free(report);
  td_workbench_free(wb);
  return exit_code;
}
