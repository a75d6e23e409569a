#pragma once

#include <string>
#include <vector>

namespace tpflow::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_validation = 2;
inline constexpr int exit_numerical = 3;

/// Runs `tpflow <subcommand> [options]`; args exclude the program name.
/// Prints a one-line summary to stdout and errors to stderr.
int run(const std::vector<std::string>& args);

/// The subcommand a config's "command" key names, or "" when absent.
std::string config_command(const std::string& config_path);

}  // namespace tpflow::cli
