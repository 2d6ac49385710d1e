#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mfgan::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int { kSuccess = 0, kConfigError = 1, kNumericalAbort = 2 };

/// Parses `args` (without the program name) and runs one subcommand:
/// mfg-train, sde-compare, fdr-probe, schedule-demo or gan-demo.
/// Artifacts go to --output-dir (default: $MFGAN_OUTPUT_DIR, else ".").
/// Every run writes manifest.ini with the fully resolved configuration
/// and one or more CSV metrics files.
int run_experiment(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mfgan::cli
