#pragma once

// Factual vs counterfactual analysis. At each decision the world is copied
// once per action, every copy is stepped with a different action, and the
// immediate rewards are compared. The copies share the generator state, so
// the enemy behaves identically across branches.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "jetrl/eval.hpp"
#include "jetrl/qnet.hpp"
#include "jetrl/sim.hpp"
#include "jetrl/trainer.hpp"

namespace jetrl {

struct CfRecord {
    std::int64_t episode = 0;
    std::int32_t step = 0; // 0-based decision index within the episode
    std::size_t chosen_action = 0;
    double factual_reward = 0.0;
    std::array<double, action_count> cf_rewards{};
    std::array<float, action_count> q_values{};

    friend bool operator==(const CfRecord&, const CfRecord&) = default;
};

struct ProbeResult {
    CfRecord record;
    StepOutcome factual;
};

/// Scores all six actions from the current state by one-step reward and
/// advances `world` by the greedy action only.
inline ProbeResult probe_counterfactuals(WorldState& world, const NetworkParams<float>& params, const EnvConfig& cfg) {
    if (world.terminated) {
        throw UsageError("cannot probe a terminated world");
    }
    ProbeResult result;
    CfRecord& rec = result.record;
    rec.step = world.step_count;
    rec.q_values = q_values(params, observe(world, cfg));
    rec.chosen_action = index_of(greedy_action(rec.q_values));

    std::optional<WorldState> chosen_branch;
    for (std::size_t a = 0; a < action_count; ++a) {
        WorldState branch = snapshot(world);
        const StepOutcome out = step(branch, static_cast<Action>(a), cfg);
        rec.cf_rewards[a] = out.reward;
        if (a == rec.chosen_action) {
            result.factual = out;
            chosen_branch = std::move(branch);
        }
    }
    rec.factual_reward = result.factual.reward;
    restore(world, *chosen_branch);
    return result;
}

/// Mean one-step reward, M[chosen][alternative]. Rows whose action was never
/// chosen have count 0 and are absent.
struct HeatmapMatrix {
    std::array<std::array<double, action_count>, action_count> mean{};
    std::array<std::int64_t, action_count> count{};

    bool present(std::size_t row) const { return count[row] > 0; }
};

struct FactualContrast {
    double mean_factual = 0.0;
    double mean_counterfactual = 0.0; // over the five non-chosen actions
    std::int64_t count = 0;
};

using ContrastTable = std::array<std::optional<FactualContrast>, action_count>;
using ActionCounts = std::array<std::int64_t, action_count>;

namespace detail {
/// Records in (episode, step) order so that sums do not depend on input order.
inline std::vector<const CfRecord*> canonical_order(const std::vector<CfRecord>& records) {
    std::vector<const CfRecord*> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        out.push_back(&r);
    }
    std::stable_sort(out.begin(), out.end(), [](const CfRecord* a, const CfRecord* b) {
        if (a->episode != b->episode) return a->episode < b->episode;
        return a->step < b->step;
    });
    return out;
}

inline void check_chosen(const CfRecord& r) {
    if (r.chosen_action >= action_count) {
        throw UsageError("record has an out-of-range chosen action");
    }
}
} // namespace detail

inline HeatmapMatrix aggregate_heatmap(const std::vector<CfRecord>& records) {
    if (records.empty()) {
        throw UsageError("aggregate_heatmap needs at least one record");
    }
    HeatmapMatrix h;
    for (const CfRecord* r : detail::canonical_order(records)) {
        detail::check_chosen(*r);
        ++h.count[r->chosen_action];
        for (std::size_t j = 0; j < action_count; ++j) {
            h.mean[r->chosen_action][j] += r->cf_rewards[j];
        }
    }
    for (std::size_t i = 0; i < action_count; ++i) {
        for (std::size_t j = 0; j < action_count; ++j) {
            h.mean[i][j] = h.count[i] > 0 ? h.mean[i][j] / static_cast<double>(h.count[i]) : 0.0;
        }
    }
    return h;
}

inline ContrastTable factual_vs_counterfactual(const std::vector<CfRecord>& records) {
    if (records.empty()) {
        throw UsageError("factual_vs_counterfactual needs at least one record");
    }
    std::array<double, action_count> factual_sum{};
    std::array<double, action_count> other_sum{};
    ActionCounts counts{};
    for (const CfRecord* r : detail::canonical_order(records)) {
        detail::check_chosen(*r);
        const std::size_t i = r->chosen_action;
        ++counts[i];
        factual_sum[i] += r->factual_reward;
        double others = 0.0;
        for (std::size_t j = 0; j < action_count; ++j) {
            if (j != i) {
                others += r->cf_rewards[j];
            }
        }
        other_sum[i] += others / static_cast<double>(action_count - 1);
    }
    ContrastTable table;
    for (std::size_t i = 0; i < action_count; ++i) {
        if (counts[i] > 0) {
            const double n = static_cast<double>(counts[i]);
            table[i] = FactualContrast{factual_sum[i] / n, other_sum[i] / n, counts[i]};
        }
    }
    return table;
}

inline ActionCounts action_distribution(const std::vector<CfRecord>& records) {
    ActionCounts counts{};
    for (const auto& r : records) {
        detail::check_chosen(r);
        ++counts[r.chosen_action];
    }
    return counts;
}

struct ExplainResult {
    std::vector<CfRecord> records;
    std::vector<EpisodeLog> logs;
    HeatmapMatrix heatmap;
    ContrastTable contrast;
    ActionCounts distribution{};
};

/// Greedy rollout of one episode with counterfactual probing at every decision.
/// The returned log matches run_episode(params, cfg, seed) exactly.
inline EpisodeLog explain_episode(const NetworkParams<float>& params, const EnvConfig& cfg, std::uint64_t seed,
                                  std::int64_t episode_id, std::vector<CfRecord>& records) {
    auto [world, obs] = reset(cfg, seed);
    EpisodeLog log;
    log.episode = episode_id;
    log.seed = seed;
    log.target_pos = world.target_pos;
    log.enemy_pos = world.enemy.pos;
    while (!world.terminated) {
        ProbeResult probe = probe_counterfactuals(world, params, cfg);
        probe.record.episode = episode_id;
        const Action a = static_cast<Action>(probe.record.chosen_action);
        log.steps.push_back(make_step_record(world, a, probe.factual, cfg));
        log.total_reward += probe.factual.reward;
        if (probe.factual.terminated) {
            log.outcome = probe.factual.outcome;
        }
        records.push_back(probe.record);
    }
    log.length = static_cast<std::int32_t>(log.steps.size());
    return log;
}

inline ExplainResult run_explain(const NetworkParams<float>& params, const EnvConfig& cfg, std::int64_t n_episodes,
                                 std::uint64_t base_seed) {
    if (n_episodes <= 0) {
        throw UsageError("run_explain needs at least one episode");
    }
    ExplainResult out;
    for (std::int64_t i = 0; i < n_episodes; ++i) {
        out.logs.push_back(explain_episode(params, cfg, base_seed + static_cast<std::uint64_t>(i), i, out.records));
    }
    out.heatmap = aggregate_heatmap(out.records);
    out.contrast = factual_vs_counterfactual(out.records);
    out.distribution = action_distribution(out.records);
    return out;
}

} // namespace jetrl
