// monoflow command-line front end: resolves a JSON config plus flag
// overrides into a RunConfig and dispatches into the core library.

#include <cstdint>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "monoflow/runner.hpp"

namespace {

struct GlobalFlags {
    std::string config_path;
    std::int64_t seed = -1;
    long replicas = -1;
    int threads = -1;
    std::string out_path;
    std::string format;
    bool no_timestamp = false;
};

void add_common_flags(CLI::App* cmd, GlobalFlags& flags, bool config_required) {
    auto* opt = cmd->add_option("--config", flags.config_path, "JSON run configuration");
    if (config_required) opt->required();
    cmd->add_option("--seed", flags.seed, "override master_seed");
    cmd->add_option("--replicas", flags.replicas, "override replica count");
    cmd->add_option("--threads", flags.threads, "worker threads (0 = machine parallelism)");
    cmd->add_option("--out", flags.out_path, "override output path");
    cmd->add_option("--format", flags.format, "output format: json or csv");
    cmd->add_flag("--no-timestamp", flags.no_timestamp,
                  "omit the timestamp field from JSON output");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"monoflow: simulation and verification lab for SDEs with "
                 "one-sided Lipschitz coefficients"};
    app.require_subcommand(1);

    const std::vector<std::string> commands = {"simulate", "check",    "gronwall",
                                               "moments",  "holder",   "delta",
                                               "additive", "list-examples"};
    GlobalFlags flags;
    for (const std::string& name : commands) {
        CLI::App* cmd = app.add_subcommand(name);
        add_common_flags(cmd, flags, name != "list-examples");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        monoflow::RunConfig cfg;
        if (!flags.config_path.empty()) {
            cfg = monoflow::RunConfig::from_file(flags.config_path);
            // a config naming a different command is almost certainly a mistake
            if (!cfg.command.empty() && cfg.command != command) {
                std::cerr << "input error: config file names command '" << cfg.command
                          << "' but the command line says '" << command << "'\n";
                return 2;
            }
        }
        cfg.command = command;
        if (flags.seed >= 0) cfg.master_seed = static_cast<std::uint64_t>(flags.seed);
        if (flags.replicas >= 0) cfg.replicas = flags.replicas;
        if (flags.threads >= 0) cfg.threads = flags.threads;
        if (!flags.out_path.empty()) cfg.output_path = flags.out_path;
        if (!flags.format.empty()) cfg.output_format = flags.format;
        if (flags.no_timestamp) cfg.with_timestamp = false;

        return monoflow::run(cfg, std::cout);
    } catch (const monoflow::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
