// Experiment runner: train / dream / gradcheck / axioms / eval, each driven
// by a JSON config file.  All failures exit nonzero with a single
// "paralens-error:" line on stderr.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "paralens/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"compositional gradient-based learning engine"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    std::int64_t seed_override = -1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config file (JSON)")
            ->required();
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--out", out_override, "override the output directory");
    };
    for (const char* name : {"train", "dream", "gradcheck", "axioms", "eval"})
        add_common(app.add_subcommand(name));

    CLI11_PARSE(app, argc, argv);

    try {
        paralens::ExperimentConfig cfg = paralens::load_config(config_path);
        cfg.task = app.get_subcommands().at(0)->get_name();
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (!out_override.empty()) cfg.out_dir = out_override;
        return paralens::run_experiment(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "paralens-error: " << e.what() << std::endl;
        return 2;
    }
}
