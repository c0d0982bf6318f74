// Command-line front end: feasibility budgets, crystal statics, cooling
// dynamics, pulse scheduling, qubit tracking and the reproduction table for
// the published figures.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "ringqc/errors.hpp"
#include "ringqc/io.hpp"
#include "ringqc/paper_check.hpp"
#include "ringqc/scenario.hpp"

namespace {

// Exit code classes (documented in the README):
constexpr int exit_ok = 0;
constexpr int exit_parse = 2;      // config or argument parsing
constexpr int exit_validation = 3; // precondition violations
constexpr int exit_runtime = 4;    // solver/runtime failures
constexpr int exit_acceptance = 5; // reproduction table out of tolerance

struct GlobalArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::string tolerance_profile = "default";
    bool json = false;
};

int run_config_command(const GlobalArgs& args,
                       const std::vector<std::string>& only_sections) {
    ringqc::ConfigFile cfg = ringqc::ConfigFile::parse_file(args.config_path);
    ringqc::scenario::Scenario sc = ringqc::scenario::load_scenario(cfg);

    if (!only_sections.empty()) {
        // subcommand restricted to one pipeline: drop the others
        auto keep = [&](const char* name) {
            for (const auto& s : only_sections)
                if (s == name)
                    return true;
            return false;
        };
        if (!keep("budget"))
            sc.budget_request.reset();
        if (!keep("crystal"))
            sc.crystal_request.reset();
        if (!keep("dynamics"))
            sc.dynamics_request.reset();
        if (!keep("gates"))
            sc.gates_request.reset();
        if (!keep("tracking"))
            sc.tracking_request.reset();
    }

    ringqc::scenario::RunOptions opts;
    opts.seed_override = args.seed;
    opts.json_only = args.json;
    const auto files =
        ringqc::scenario::run_scenario(sc, args.out_dir, opts);
    for (const auto& f : files)
        std::cout << "wrote " << f.string() << "\n";
    return exit_ok;
}

int run_paper_check(const GlobalArgs& args) {
    const double scale = args.tolerance_profile == "strict" ? 0.5 : 1.0;
    const auto rows = ringqc::check::paper_check(scale);
    if (args.json) {
        std::cout << ringqc::check::to_json(rows);
    } else {
        ringqc::check::write_table(std::cout, rows);
    }
    if (!args.out_dir.empty()) {
        ringqc::io::atomic_write(
            std::filesystem::path(args.out_dir) / "paper_check.json",
            ringqc::check::to_json(rows));
    }
    return ringqc::check::all_match_rows_pass(rows) ? exit_ok
                                                    : exit_acceptance;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"storage-ring ion-crystal feasibility simulator"};
    app.require_subcommand(1);

    GlobalArgs args;
    app.add_option("--out", args.out_dir, "output directory");
    app.add_option("--seed", args.seed, "override all scenario seeds");
    app.add_option("--tolerance-profile", args.tolerance_profile,
                   "default or strict")
        ->check(CLI::IsMember({"default", "strict"}));
    app.add_flag("--json", args.json, "machine-readable output only");

    auto add_config_cmd = [&](const char* name, const char* desc) {
        auto* cmd = app.add_subcommand(name, desc);
        cmd->fallthrough();
        cmd->add_option("--config", args.config_path, "scenario config file")
            ->required();
        return cmd;
    };

    auto* cmd_budget =
        add_config_cmd("budget", "closed-form feasibility estimates");
    auto* cmd_crystal =
        add_config_cmd("crystal", "equilibrium structure and phonon modes");
    auto* cmd_cool =
        add_config_cmd("cool", "stochastic cooling dynamics on the orbit");
    auto* cmd_gates =
        add_config_cmd("gates", "pulse scheduling and gate budgets");
    auto* cmd_track =
        add_config_cmd("track", "bright/dark qubit identification");
    auto* cmd_run = add_config_cmd("run", "full scenario");
    auto* cmd_check = app.add_subcommand(
        "paper-check", "recompute the published feasibility figures");
    cmd_check->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_parse;
    }

    try {
        if (cmd_check->parsed())
            return run_paper_check(args);
        if (cmd_budget->parsed())
            return run_config_command(args, {"budget"});
        if (cmd_crystal->parsed())
            return run_config_command(args, {"crystal"});
        if (cmd_cool->parsed())
            return run_config_command(args, {"dynamics"});
        if (cmd_gates->parsed())
            return run_config_command(args, {"gates"});
        if (cmd_track->parsed())
            return run_config_command(args, {"tracking"});
        if (cmd_run->parsed())
            return run_config_command(args, {});
    } catch (const ringqc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_parse;
    } catch (const ringqc::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const ringqc::DomainError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const ringqc::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return exit_ok;
}
