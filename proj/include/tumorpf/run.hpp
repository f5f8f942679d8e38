#pragma once

#include <ostream>
#include <string>

#include "tumorpf/config.hpp"
#include "tumorpf/error.hpp"

namespace tpf {

/// Process exit statuses of a run.
enum ExitStatus : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitVerify = 4,
};

/// Config, input, i/o and hypothesis errors map to kExitConfig, numerical
/// failures to kExitSolver.
int exit_status(ErrorCode code);

struct RunOptions {
  bool quiet = false;
  bool force = false;  // reuse a non-empty output directory
};

/// Runs one of simulate | optimize | analyze | verify into
/// config.output.out_dir and returns the exit status. Library errors
/// propagate as tpf::Error; the output directory holds whatever was written.
///
///   all        resolved_config.json
///   simulate   snapshots/state_NNNNN.csv, diagnostics.csv
///   optimize   control.csv, history.csv, gradient.csv
///   analyze    as optimize, plus adjoint/adjoint_NNNNN.csv, active_sets.csv,
///              ssc_report.json
///   verify     verify_report.json
int run_subcommand(const std::string& subcommand, const RunConfig& config, const RunOptions& options,
                   std::ostream& log);

/// Name of the report key holding the wall-clock time; the only field that
/// differs between reruns.
inline constexpr const char* kTimestampKey = "generated_at";

}  // namespace tpf
