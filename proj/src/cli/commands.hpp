#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qcontrol::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kNumerical = 2 };

/// Runs one qcontrol command line (without the program name). Invalid input
/// maps to kUsage, optimizer or sweep failures to kNumerical.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// QCONTROL_WORKERS if set to a positive integer, else 1.
int default_workers();

}  // namespace qcontrol::cli
