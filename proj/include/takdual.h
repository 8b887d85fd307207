/* C interface to the takdual workbench shared library.
 *
 * The workbench runs verification commands against JSON scenario documents
 * and hands back JSON reports. All objects are opaque; strings returned by
 * accessor functions stay owned by the object they were read from and remain
 * valid until that object is freed.
 */

#ifndef TAKDUAL_H
#define TAKDUAL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define TD_API __declspec(dllexport)
#else
#define TD_API __attribute__((visibility("default")))
#endif

typedef struct td_workbench td_workbench;
typedef struct td_report td_report;

/* Mirrors the CLI exit codes. */
typedef enum td_status {
  TD_OK = 0,
  TD_CHECK_FAILED = 1,
  TD_PARSE_ERROR = 2,
  TD_PRECONDITION_FAILED = 3,
  TD_NUMERICALLY_AMBIGUOUS = 4,
  TD_INVALID_ARGUMENT = 5,
  TD_INTERNAL_ERROR = 6
} td_status;

TD_API const char* td_version(void);

/* Space-separated list of the available commands. */
TD_API const char* td_commands(void);

TD_API td_workbench* td_workbench_new(void);
TD_API void td_workbench_free(td_workbench* wb);

/* Optional overrides; when unset, scenario fields (or defaults) apply. */
TD_API void td_workbench_set_tolerance(td_workbench* wb, double tolerance);
TD_API void td_workbench_set_seed(td_workbench* wb, uint64_t seed);

/* Runs a command against a scenario JSON document. On success (*out_report)
 * owns the report and must be released with td_report_free; on invalid
 * arguments no report is produced and td_last_error describes the problem.
 * The return value equals td_report_status of the produced report. */
TD_API td_status td_run(td_workbench* wb, const char* command,
                        const char* scenario_json, td_report** out_report);

TD_API const char* td_last_error(const td_workbench* wb);

TD_API const char* td_report_json(const td_report* report);
TD_API td_status td_report_status(const td_report* report);
TD_API void td_report_free(td_report* report);

#ifdef __cplusplus
}
#endif

#endif /* TAKDUAL_H */
