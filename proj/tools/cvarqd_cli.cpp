// Command-line entry point: run presets or config files and print presets.

#include "cvarqd/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

namespace {

cvarqd::ExperimentConfig resolve(const std::string& target) {
    const auto& names = cvarqd::preset_names();
    if (std::find(names.begin(), names.end(), target) != names.end()) return cvarqd::preset(target);
    if (std::filesystem::exists(target)) return cvarqd::load_config(target);
    throw std::invalid_argument("'" + target + "' is neither a preset nor a readable config file");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk-aware distributed Q-learning (CVaR QD-learning) and CVaR value-iteration oracle"};
    app.require_subcommand(1);

    auto* run_cmd = app.add_subcommand("run", "Run a preset or config file and emit CSV/SVG/JSON artifacts");
    std::string target;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool strict = false;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> snapshot_every;
    bool no_svg = false;
    run_cmd->add_option("target", target, "preset name (fig1, fig2, paper-fig, oracle-check) or config path")
        ->required();
    run_cmd->add_option("--seed", seed, "seed for both the random game and the trajectory");
    run_cmd->add_option("--out", out_dir, "output directory");
    run_cmd->add_flag("--strict", strict, "fail on weight-schedule validation errors");
    run_cmd->add_option("--steps", steps, "number of learner steps");
    run_cmd->add_option("--snapshot-every", snapshot_every, "per-agent Q snapshot cadence (0 = initial and final)");
    run_cmd->add_flag("--no-svg", no_svg, "skip SVG rendering");

    auto* preset_cmd = app.add_subcommand("preset", "Print a preset as a config file");
    std::string preset_name;
    preset_cmd->add_option("name", preset_name, "preset name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*preset_cmd) {
            cvarqd::write_config(std::cout, cvarqd::preset(preset_name));
            return 0;
        }

        cvarqd::ExperimentConfig cfg = resolve(target);
        if (seed) {
            cfg.random_game.seed = *seed;
            cfg.learner.seed = *seed;
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (strict) cfg.learner.strict = true;
        if (steps) cfg.learner.total_steps = *steps;
        if (snapshot_every) cfg.learner.snapshot_every = *snapshot_every;
        if (no_svg) cfg.svg = false;

        const auto manifest = cvarqd::run_experiment(cfg);
        for (const auto& f : manifest.files) std::cout << f << '\n';
        return 0;
    } catch (const cvarqd::StrictModeViolation& e) {
        std::cerr << "strict mode: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
