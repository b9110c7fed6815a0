#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sntk/commands.hpp"
#include "sntk/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"one-hidden-layer ReLU network laboratory: kernels, sparse "
                 "training, and bound evaluation"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;

    const char* names[] = {"train", "sparsity", "ntk", "bounds", "verify", "bench"};
    const char* blurbs[] = {
        "run gradient descent and write trace/checkpoint/summary",
        "track per-step activation fractions and their drift",
        "write the empirical and limiting kernels plus concentration verdict",
        "evaluate every bound and write the report",
        "run the oracle cross-check suite",
        "time one dense vs sparse gradient step"};
    for (int i = 0; i < 6; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--set", overrides,
                        "dotted-path override, e.g. train.eta=0.05")
            ->take_all();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--seed", seed, "master seed override")
            ->each([&](const std::string&) { seed_given = true; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);  // prints message/help; 0 for --help
        return rc == 0 ? 0 : sntk::exit_code::config;
    }
    const std::string name = app.get_subcommands().front()->get_name();

    sntk::ExperimentConfig cfg;
    try {
        cfg = sntk::load_config(
            config_path, overrides,
            out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir),
            seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt);
    } catch (const sntk::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sntk::exit_code::io;
    } catch (const sntk::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return sntk::exit_code::config;
    }
    return sntk::run_command(name, cfg);
}
