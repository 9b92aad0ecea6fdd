#pragma once

// File-producing implementations of the CLI subcommands.

#include <filesystem>
#include <iostream>
#include <string>

#include "jetrl/checkpoint.hpp"
#include "jetrl/eval.hpp"
#include "jetrl/io/cli.hpp"
#include "jetrl/io/csv.hpp"
#include "jetrl/io/svg.hpp"
#include "jetrl/trainer.hpp"
#include "jetrl/xai.hpp"

namespace jetrl {

namespace detail {
inline std::filesystem::path ensure_dir(const std::string& dir) {
    std::filesystem::path p(dir);
    std::error_code ec;
    std::filesystem::create_directories(p, ec);
    if (ec) {
        throw IoError("cannot create output directory (" + ec.message() + ")", p.string());
    }
    return p;
}
} // namespace detail

/// Writes metrics.csv (streamed per window), train_episodes.csv, periodic
/// checkpoint_<step>.jqn files and final.jqn into the output directory.
inline TrainResult run_train_command(const RunConfig& cfg, std::ostream& log = std::cerr) {
    const auto dir = detail::ensure_dir(cfg.io.out_dir);
    const auto metrics_path = dir / "metrics.csv";
    std::ofstream metrics(metrics_path, std::ios::binary | std::ios::trunc);
    if (!metrics) {
        throw IoError("cannot open file for writing", metrics_path.string());
    }
    metrics << metrics_header << "\n";

    TrainHooks hooks;
    hooks.on_metrics = [&](const MetricsRow& row) {
        metrics << metrics_row_line(row);
        metrics.flush();
        if (!metrics) {
            throw IoError("failed writing metrics", metrics_path.string());
        }
        log << "step " << row.step << "  eps " << fmt6(row.epsilon) << "  mean_reward " << fmt6(row.mean_reward)
            << "  mean_len " << fmt6(row.mean_ep_length) << "  success " << row.successes << "/"
            << (row.successes + row.failures) << "\n";
    };
    hooks.checkpoint_interval = cfg.io.checkpoint_interval;
    hooks.on_checkpoint = [&](std::int64_t step, const NetworkParams<float>& p, const AdamState<float>& a) {
        save_checkpoint(dir / ("checkpoint_" + std::to_string(step) + ".jqn"), p, &a);
    };

    TrainResult result = train(cfg.world, cfg.train, hooks);
    save_checkpoint(dir / "final.jqn", result.online, &result.adam);
    write_text_file(dir / "train_episodes.csv", training_episodes_csv(result.episodes));
    return result;
}

/// Writes episodes.csv, episodes_meta.csv, eval_summary.csv and trajectories.svg
/// (first 50 episodes).
inline EvalStats run_eval_command(const RunConfig& cfg, const std::string& checkpoint) {
    const NetworkParams<float> params = load_checkpoint(checkpoint);
    const auto dir = detail::ensure_dir(cfg.io.out_dir);
    const auto logs = collect_trajectories(params, cfg.world, cfg.eval.episodes, cfg.eval.base_seed);
    const EvalStats stats = summarize(logs);
    write_episode_csv(logs, dir / "episodes.csv");
    write_text_file(dir / "episodes_meta.csv", episode_meta_csv(logs));
    write_text_file(dir / "eval_summary.csv", eval_summary_csv(stats));
    const std::vector<EpisodeLog> shown(logs.begin(), logs.begin() + std::min<std::ptrdiff_t>(50, std::ssize(logs)));
    render_trajectories_svg(shown, cfg.world, dir / "trajectories.svg");
    return stats;
}

/// Writes heatmap, factual/counterfactual, and action distribution CSV + SVG,
/// plus the per-decision counterfactuals.csv.
inline ExplainResult run_explain_command(const RunConfig& cfg, const std::string& checkpoint) {
    const NetworkParams<float> params = load_checkpoint(checkpoint);
    const auto dir = detail::ensure_dir(cfg.io.out_dir);
    ExplainResult r = run_explain(params, cfg.world, cfg.explain.episodes, cfg.explain.base_seed);
    write_heatmap_csv(r.heatmap, dir / "heatmap.csv");
    render_heatmap_svg(r.heatmap, dir / "heatmap.svg");
    write_text_file(dir / "factual_vs_counterfactual.csv", contrast_csv(r.contrast));
    write_text_file(dir / "factual_vs_counterfactual.svg", render_contrast_svg(r.contrast));
    write_text_file(dir / "action_distribution.csv", distribution_csv(r.distribution));
    write_text_file(dir / "action_distribution.svg", render_distribution_svg(r.distribution));
    write_text_file(dir / "counterfactuals.csv", counterfactual_records_csv(r.records));
    return r;
}

inline void run_render_command(const RunConfig& cfg, const std::string& log_path, const std::string& out_path) {
    const auto logs = read_episode_csv(log_path);
    if (logs.empty()) {
        throw IoError("episode CSV contains no steps", log_path);
    }
    render_trajectories_svg(logs, cfg.world, out_path);
}

/// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or I/O error.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CliRequest req;
    try {
        req = parse_cli(argc, argv);
    } catch (const HelpRequested& h) {
        out << h.text;
        return 0;
    } catch (const CliUsageError& e) {
        err << "error: " << e.what() << "\n\n" << e.help();
        return 1;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        switch (req.command) {
        case Command::Train: {
            const auto r = run_train_command(req.config, err);
            out << "trained " << req.config.train.total_steps << " steps, " << r.episodes.size()
                << " episodes; outputs in " << req.config.io.out_dir << "\n";
            break;
        }
        case Command::Eval: {
            const auto s = run_eval_command(req.config, req.checkpoint);
            out << "episodes " << s.episodes << "  successes " << s.successes << "  failures " << s.failures
                << "  success_rate " << fmt6(s.success_rate) << "%  mean_length " << fmt6(s.mean_length) << "\n";
            break;
        }
        case Command::Explain: {
            const auto r = run_explain_command(req.config, req.checkpoint);
            out << "decisions " << r.records.size() << " over " << r.logs.size() << " episodes; outputs in "
                << req.config.io.out_dir << "\n";
            break;
        }
        case Command::Render:
            run_render_command(req.config, req.log, req.render_out);
            out << "wrote " << req.render_out << "\n";
            break;
        }
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

} // namespace jetrl
