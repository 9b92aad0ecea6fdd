#pragma once

// Command-line front end. Precedence: flags > config file > defaults.
//
//   jetrl train   [--config P] [--seed N] [--steps N] [--out DIR]
//   jetrl eval    --checkpoint P [--config P] [--episodes N] [--seed N] [--out DIR]
//   jetrl explain --checkpoint P [--config P] [--episodes N] [--seed N] [--out DIR]
//   jetrl render  --log P --out P [--config P]

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jetrl/errors.hpp"
#include "jetrl/io/config.hpp"

namespace jetrl {

enum class Command { Train, Eval, Explain, Render };

struct CliRequest {
    Command command = Command::Train;
    RunConfig config;
    std::string checkpoint; // eval / explain
    std::string log;        // render
    std::string render_out; // render
};

/// Usage problem on the command line; `help()` carries the text to show.
class CliUsageError : public UsageError {
  public:
    CliUsageError(const std::string& what, std::string help) : UsageError(what), help_(std::move(help)) {}
    const std::string& help() const noexcept { return help_; }

  private:
    std::string help_;
};

/// Thrown for --help; not an error, but parsing stops.
struct HelpRequested {
    std::string text;
};

inline CliRequest parse_cli(const std::vector<std::string>& args) {
    CLI::App app{"Fighter-jet DDQN arena: training, evaluation, counterfactual analysis, rendering", "jetrl"};
    app.require_subcommand(1);

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> steps;
    std::optional<std::int64_t> episodes;
    std::optional<std::string> out;
    CliRequest req;

    auto* train = app.add_subcommand("train", "Train a DDQN agent");
    train->add_option("--config", config_path, "Config file (section.key = value)");
    train->add_option("--seed", seed, "Training seed");
    train->add_option("--steps", steps, "Total environment steps");
    train->add_option("--out", out, "Output directory");

    auto* eval = app.add_subcommand("eval", "Greedy evaluation of a checkpoint");
    eval->add_option("--checkpoint", req.checkpoint, "Checkpoint file")->required();
    eval->add_option("--config", config_path, "Config file");
    eval->add_option("--episodes", episodes, "Number of episodes");
    eval->add_option("--seed", seed, "Base episode seed");
    eval->add_option("--out", out, "Output directory");

    auto* explain = app.add_subcommand("explain", "Factual vs counterfactual analysis of a checkpoint");
    explain->add_option("--checkpoint", req.checkpoint, "Checkpoint file")->required();
    explain->add_option("--config", config_path, "Config file");
    explain->add_option("--episodes", episodes, "Number of episodes");
    explain->add_option("--seed", seed, "Base episode seed");
    explain->add_option("--out", out, "Output directory");

    auto* render = app.add_subcommand("render", "Render an episode CSV as an SVG trajectory map");
    render->add_option("--log", req.log, "Episode CSV written by eval")->required();
    render->add_option("--out", req.render_out, "SVG output path")->required();
    render->add_option("--config", config_path, "Config file (arena size)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        const CLI::App* sub = nullptr;
        for (const auto* s : {train, eval, explain, render}) {
            if (s->parsed()) sub = s;
        }
        throw CliUsageError(e.what(), sub != nullptr ? sub->help() : app.help());
    }

    req.config = config_path ? load_config(*config_path) : default_run_config();
    RunConfig& c = req.config;
    if (train->parsed()) {
        req.command = Command::Train;
        if (seed) c.train.seed = *seed;
        if (steps) c.train.total_steps = *steps;
    } else if (eval->parsed()) {
        req.command = Command::Eval;
        if (seed) c.eval.base_seed = *seed;
        if (episodes) c.eval.episodes = *episodes;
    } else if (explain->parsed()) {
        req.command = Command::Explain;
        if (seed) c.explain.base_seed = *seed;
        if (episodes) c.explain.episodes = *episodes;
    } else {
        req.command = Command::Render;
    }
    if (out) c.io.out_dir = *out;
    c.validate();
    return req;
}

inline CliRequest parse_cli(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        args.emplace_back(argv[i]);
    }
    return parse_cli(args);
}

} // namespace jetrl
