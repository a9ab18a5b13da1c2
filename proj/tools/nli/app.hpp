#pragma once

#include <iosfwd>
#include <string>

#include "config.hpp"

namespace nli::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kInvariantViolation = 4 };

int cmd_analyze(const RunConfig& cfg, std::ostream& out);
int cmd_stability(const RunConfig& cfg, std::ostream& out);
int cmd_minimize(const RunConfig& cfg, std::ostream& out);
int cmd_scan(const RunConfig& cfg, std::ostream& out);

/// Full command line entry point; exceptions are mapped to exit codes and
/// their messages written to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nli::cli
