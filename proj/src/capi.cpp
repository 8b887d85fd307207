#include "takdual.h"

#include "takdual/scenario.hpp"

#include <memory>
#include <new>
#include <string>

using takdual::scenario::Config;
using takdual::scenario::RunResult;

struct td_workbench {
  Config config;
  std::string last_error;
};

struct td_report {
  std::string json;
  td_status status = TD_OK;
};

namespace {

std::string g_commands_cache;

td_status status_from_exit_code(int code) {
  switch (code) {
    case 0: return TD_OK;
    case 1: return TD_CHECK_FAILED;
    case 2: return TD_PARSE_ERROR;
    case 3: return TD_PRECONDITION_FAILED;
    case 4: return TD_NUMERICALLY_AMBIGUOUS;
    default: return TD_INTERNAL_ERROR;
  }
}

}  // namespace

extern "C" {

const char* td_version(void) { return takdual::scenario::version(); }

const char* td_commands(void) {
  if (g_commands_cache.empty()) {
    for (const auto& c : takdual::scenario::commands()) {
      if (!g_commands_cache.empty()) g_commands_cache += " ";
      g_commands_cache += c;
    }
  }
  return g_commands_cache.c_str();
}

td_workbench* td_workbench_new(void) { return new (std::nothrow) td_workbench(); }

void td_workbench_free(td_workbench* wb) { delete wb; }

void td_workbench_set_tolerance(td_workbench* wb, double tolerance) {
  if (!wb) return;
  wb->config.tolerance = tolerance;
  wb->config.tolerance_overridden = true;
}

void td_workbench_set_seed(td_workbench* wb, uint64_t seed) {
  if (!wb) return;
  wb->config.seed = seed;
  wb->config.seed_overridden = true;
}

td_status td_run(td_workbench* wb, const char* command, const char* scenario_json,
                 td_report** out_report) {
  if (!wb) return TD_INVALID_ARGUMENT;
  if (out_report) *out_report = nullptr;
  if (!command || !scenario_json || !out_report) {
    wb->last_error = "td_run: command, scenario_json and out_report are required";
    return TD_INVALID_ARGUMENT;
  }
  try {
    RunResult result = takdual::scenario::run(command, scenario_json, wb->config);
    auto report = std::make_unique<td_report>();
    report->json = std::move(result.report_json);
    report->status = status_from_exit_code(result.exit_code);
    *out_report = report.release();
    wb->last_error.clear();
    return (*out_report)->status;
  } catch (const std::exception& e) {
    wb->last_error = e.what();
    return TD_INTERNAL_ERROR;
  } catch (...) {
    wb->last_error = "unknown error";
    return TD_INTERNAL_ERROR;
  }
}

const char* td_last_error(const td_workbench* wb) {
  return wb ? wb->last_error.c_str() : "null workbench";
}

const char* td_report_json(const td_report* report) {
  return report ? report->json.c_str() : "";
}

td_status td_report_status(const td_report* report) {
  return report ? report->status : TD_INVALID_ARGUMENT;
}

void td_report_free(td_report* report) { delete report; }

}  // extern "C"
