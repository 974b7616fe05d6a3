#pragma once

#include <filesystem>
#include <iosfwd>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stepspike::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_input_error = 2,
    exit_consistency_error = 3,
    exit_not_converged = 4,
    exit_missing_stage = 5,
};

/// A command needs the output of an earlier pipeline stage that is absent.
class MissingStageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Subcommand names in help order.
const std::vector<std::string>& command_names();

/// Default configuration of one command, including the shared keys.
nlohmann::json default_config(std::string_view command);

/// Defaults overlaid with the config file (top-level keys known to the command,
/// then an optional object named after the command) and finally `overrides`.
nlohmann::json resolve_config(std::string_view command, const nlohmann::json& file, const nlohmann::json& overrides);

/// Run one command with a resolved configuration; writes into `out_dir` and
/// returns the exit code. Library exceptions propagate.
int run_command(std::string_view command, const nlohmann::json& config, const std::filesystem::path& out_dir,
                std::ostream& log);

/// Full command line entry point (argv without the program name). Maps
/// exceptions to exit codes and reports them on `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stepspike::cli
