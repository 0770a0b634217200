#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "warpres/chain.hpp"
#include "warpres/config.hpp"
#include "warpres/report.hpp"

namespace warpres {

struct CliOptions {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::string out_dir;  // overrides output.dir when set
    bool oracle = false;
    bool report_only = false;
    bool find_tau0 = false;
};

// Exit codes: 0 success, 1 runtime error, 2 bad input, 3 a check failed.
enum ExitCode : int { kExitOk = 0, kExitError = 1, kExitInput = 2, kExitCheck = 3 };

struct CommandResult {
    int exit_code = kExitOk;
    std::string summary_line;
    ordered_json summary;
    std::string run_dir;
};

RunConfig resolve_config(const CliOptions& opts);

CommandResult cmd_profile(const RunConfig& cfg, const CliOptions& opts);
CommandResult cmd_sweep(const RunConfig& cfg, const CliOptions& opts);
CommandResult cmd_carleman(const RunConfig& cfg, const CliOptions& opts);
CommandResult cmd_resolve(const RunConfig& cfg, const CliOptions& opts);
CommandResult cmd_chain(const RunConfig& cfg, const CliOptions& opts);

// Dispatch by subcommand name; catches errors and maps them to exit codes.
CommandResult run_command(const std::string& name, const CliOptions& opts);

BallCoverGraph graph_from_json(const ordered_json& j);
ordered_json graph_to_json(const BallCoverGraph& g);

}  // namespace warpres
