#include <iostream>

#include "CLI11.hpp"
#include "warpres/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"warpres: weight/phase, Carleman, chain and resolvent experiments"};
    app.require_subcommand(1);
    warpres::CliOptions opts;
    std::uint64_t seed = 0;
    unsigned workers = 0;

    const std::pair<const char*, const char*> commands[] = {
        {"profile", "weight/phase profile and key-inequality certificate at params.h"},
        {"carleman", "metric check, derivative identity and random Carleman-ratio suite"},
        {"resolve", "cutoff resolvent norm sweep, exponent fit and bound check"},
        {"chain", "kappa schedules, Q factors and gamma for a ball-cover graph"},
        {"sweep", "per-h key-inequality certification and phase-scaling fit"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config_path, "scenario file (key = value)")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--set", opts.overrides, "key=value override, repeatable");
        sub->add_option("--out", opts.out_dir, "run directory, overrides output.dir");
        sub->add_flag("--oracle", opts.oracle, "dense SVD cross-check where N is small");
        sub->add_flag("--report-only", opts.report_only, "exit 0 even when a check fails");
        sub->add_flag("--find-tau0", opts.find_tau0, "search for an admissible tau0 (profile)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? warpres::kExitOk : warpres::kExitInput;
    }

    const auto* sub = app.get_subcommands().front();
    if (sub->count("--seed")) opts.seed = seed;
    if (sub->count("--workers")) opts.workers = workers;

    const warpres::CommandResult res = warpres::run_command(sub->get_name(), opts);
    (res.exit_code == warpres::kExitOk || res.exit_code == warpres::kExitCheck ? std::cout : std::cerr)
        << res.summary_line << "\n";
    if (!res.run_dir.empty()) std::cout << "run directory: " << res.run_dir << "\n";
    return res.exit_code;
}
