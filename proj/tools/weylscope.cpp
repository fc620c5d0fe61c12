#include "weylscope/error.hpp"
#include "weylscope/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace cli = weylscope::cli;

int main(int argc, char** argv) {
    CLI::App app{"Billiard dynamics, Laplace spectra and Weyl remainder experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::vector<std::string> inputs;
    int threads = 0;
    std::uint64_t seed = 0;
    bool assert_checks = false;

    for (auto task : {cli::Task::spectrum, cli::Task::orbits, cli::Task::weyl, cli::Task::trace, cli::Task::rellich,
                      cli::Task::report}) {
        auto* sub = app.add_subcommand(cli::to_string(task));
        auto* config = sub->add_option("--config", config_path, "experiment JSON");
        if (task != cli::Task::report) config->required();
        sub->add_option("--out", out_dir, "output directory (a config \"output\" entry takes precedence)");
        sub->add_option("--threads", threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "seed for multi-start orbit searches");
        if (task == cli::Task::report) {
            sub->add_option("--input", inputs, "run directories to aggregate (default: --out)");
            sub->add_flag("--assert", assert_checks, "exit 4 when any recorded check failed");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const auto task = *cli::parse_task(app.get_subcommands().front()->get_name());
        cli::ExperimentConfig cfg;
        cfg.task = task;
        if (!config_path.empty()) cfg = cli::load_config(config_path, task);
        if (!cfg.seed && app.get_subcommands().front()->count("--seed")) cfg.seed = seed;
        if (!cfg.threads) cfg.threads = threads;
        for (const auto& in : inputs) cfg.inputs.emplace_back(in);
        const std::filesystem::path out = cfg.output ? *cfg.output : std::filesystem::path(out_dir.empty() ? "out" : out_dir);

        const auto outcome = cli::run(cfg, out);
        std::cout << cli::to_string(task) << ": wrote " << outcome.directory.string() << '\n';
        for (const auto& name : outcome.failed_checks) std::cout << "check failed: " << name << '\n';
        if (task == cli::Task::report && assert_checks && !outcome.failed_checks.empty()) return 4;
        return 0;
    } catch (const weylscope::Error& e) {
        std::cerr << "weylscope: " << e.what() << '\n';
        return cli::exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "weylscope: " << e.what() << '\n';
        return 3;
    }
}
