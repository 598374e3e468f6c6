#ifndef ADVMOT_COMMANDS_HPP_
#define ADVMOT_COMMANDS_HPP_

#include "advmot/config.hpp"

#include <ostream>
#include <string>

namespace advmot {

enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitConfig = 2, kExitResource = 3 };

/// Each command writes its records to `out` (line-delimited JSON, or CSV for
/// the classify grid) and diagnostics to `log`. None of them catch errors;
/// run_command does that and maps them to exit codes.
int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_classify(const RunConfig& cfg, std::ostream& out, std::ostream& log);
int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// Dispatches by name, turns exceptions into an error record plus exit code,
/// and mirrors the output into cfg.out_dir when set (timestamps only go to
/// run.log there, never into the records).
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& out, std::ostream& log);

/// {"error": kind, "message": text} on one line.
std::string error_record(const std::string& kind, const std::string& message);

}  // namespace advmot

#endif  // ADVMOT_COMMANDS_HPP_
