#pragma once

#include <string>
#include <vector>

namespace ecofair::cli {

// Subcommands: synth, calibrate, run, sweep, report.
// Exit codes: 0 success, 1 data/config error, 2 usage error.
int run_cli(const std::vector<std::string>& args);

int run_cli(int argc, char** argv);

} // namespace ecofair::cli
