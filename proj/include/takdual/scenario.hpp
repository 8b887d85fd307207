#pragma once

// Scenario-driven front end: JSON scenario parsing, command dispatch into the
// modules, and machine-readable verification reports. This is the layer the
// C API and the CLI sit on.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace takdual::scenario {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tolerance/seed resolution: explicit setter > scenario field > default.
struct Config {
  double tolerance = 1e-9;
  std::uint64_t seed = 0;
  bool tolerance_overridden = false;
  bool seed_overridden = false;
};

struct RunResult {
  std::string report_json;  // pretty-printed, keys sorted, deterministic
  int exit_code = 0;        // 0 pass, 1 failed check, 2 parse, 3 precondition,
                            // 4 numerical ambiguity
};

const std::vector<std::string>& commands();
bool is_command(const std::string& name);
const char* version();

// Runs one command against a scenario document. Never throws: every failure
// mode is folded into the report and the exit code.
RunResult run(const std::string& command, const std::string& scenario_json,
              const Config& config);

}  // namespace takdual::scenario
