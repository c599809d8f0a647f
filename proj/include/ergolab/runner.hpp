#pragma once

#include "ergolab/config.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace ergolab {

/// Files produced by one run, keyed by file name, plus the exit code
/// (0 completed, 2 ergodicity refusal or offending frequency).
struct RunOutput {
    int exit_code = 0;
    std::map<std::string, std::string> files;
};

const std::vector<std::string>& command_names();

/// Runs a subcommand entirely in memory. Configuration problems raise
/// ConfigError, UsageError or UnsupportedError before any output exists.
RunOutput run_command(const std::string& command, ExperimentConfig config);

/// Writes every file of `output` into `directory`, creating it if needed.
void write_outputs(const RunOutput& output, const std::string& directory);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace ergolab
