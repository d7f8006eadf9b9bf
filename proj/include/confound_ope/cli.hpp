#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "confound_ope/core.hpp"
#include "confound_ope/diagnostics.hpp"

namespace confound_ope::cli {

enum ExitCode : int { kOk = 0, kValidationError = 1, kIoError = 2 };

// `a0`, `a1`, ... (deterministic), `uniform`, or an explicit list `0.2,0.8`.
diagnostics::NamedPolicy parse_target(const std::string& spec, std::size_t num_actions);

// Subcommands: simulate, estimate, diagnose, sweep, plot.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

} // namespace confound_ope::cli
