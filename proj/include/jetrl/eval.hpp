#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "jetrl/env_config.hpp"
#include "jetrl/qnet.hpp"
#include "jetrl/sim.hpp"
#include "jetrl/trainer.hpp"

namespace jetrl {

struct StepRecord {
    std::int32_t step = 0; // 1-based index of the decision within the episode
    Vec2 pos;
    double heading = 0.0;
    double speed = 0.0;
    Action action = Action::Noop;
    double reward = 0.0;
    double d_target = 0.0;
    double d_enemy = 0.0;
    bool t_z = false;
    bool v_e = false;

    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EpisodeLog {
    std::int64_t episode = 0;
    std::uint64_t seed = 0;
    OutcomeKind outcome = OutcomeKind::Running;
    std::int32_t length = 0;
    double total_reward = 0.0;
    std::vector<StepRecord> steps;
    Vec2 target_pos;
    Vec2 enemy_pos;

    friend bool operator==(const EpisodeLog&, const EpisodeLog&) = default;
};

/// Log entry for the decision that produced `world` (the post-step state).
inline StepRecord make_step_record(const WorldState& world, Action a, const StepOutcome& out, const EnvConfig& cfg) {
    StepRecord rec;
    rec.step = world.step_count;
    rec.pos = world.agent.pos;
    rec.heading = world.agent.heading;
    rec.speed = world.agent.speed;
    rec.action = a;
    rec.reward = out.reward;
    rec.d_target = distance(world.agent.pos, world.target_pos);
    rec.d_enemy = distance(world.agent.pos, world.enemy.pos);
    rec.t_z = in_target_zone(world, cfg);
    rec.v_e = enemy_visible(world, cfg);
    return rec;
}

/// Rolls one episode with an epsilon-greedy policy (greedy by default).
/// The exploration stream is seeded from the episode seed and is separate from the world's.
inline EpisodeLog run_episode(const NetworkParams<float>& params, const EnvConfig& cfg, std::uint64_t seed,
                              double policy_epsilon = 0.0, std::int64_t episode_id = 0) {
    auto [world, obs] = reset(cfg, seed);
    std::mt19937_64 policy_rng(seed ^ 0xD1B54A32D192ED03ULL);
    EpisodeLog log;
    log.episode = episode_id;
    log.seed = seed;
    log.target_pos = world.target_pos;
    log.enemy_pos = world.enemy.pos;
    while (!world.terminated) {
        Action a = greedy_action(q_values(params, obs));
        if (policy_epsilon > 0.0 && detail::uniform01(policy_rng) < policy_epsilon) {
            a = static_cast<Action>(policy_rng() % action_count);
        }
        const StepOutcome out = step(world, a, cfg);
        const StepRecord rec = make_step_record(world, a, out, cfg);
        log.steps.push_back(rec);
        log.total_reward += out.reward;
        obs = out.observation;
        if (out.terminated) {
            log.outcome = out.outcome;
        }
    }
    log.length = static_cast<std::int32_t>(log.steps.size());
    return log;
}

struct EvalStats {
    std::int64_t episodes = 0;
    std::int64_t successes = 0;
    std::int64_t failures = 0;
    double success_rate = 0.0; // percent
    double mean_length = 0.0;
    double median_length = 0.0;
    double mean_total_reward = 0.0;
};

inline EvalStats summarize(const std::vector<EpisodeLog>& logs) {
    EvalStats s;
    s.episodes = static_cast<std::int64_t>(logs.size());
    if (logs.empty()) {
        return s;
    }
    std::vector<std::int32_t> lengths;
    double len_sum = 0.0;
    double reward_sum = 0.0;
    for (const auto& l : logs) {
        (l.outcome == OutcomeKind::TargetDestroyed ? s.successes : s.failures) += 1;
        lengths.push_back(l.length);
        len_sum += l.length;
        reward_sum += l.total_reward;
    }
    const double n = static_cast<double>(logs.size());
    s.success_rate = 100.0 * static_cast<double>(s.successes) / n;
    s.mean_length = len_sum / n;
    s.mean_total_reward = reward_sum / n;
    std::sort(lengths.begin(), lengths.end());
    const std::size_t mid = lengths.size() / 2;
    s.median_length = lengths.size() % 2 == 1 ? lengths[mid] : 0.5 * (lengths[mid - 1] + lengths[mid]);
    return s;
}

/// Episodes use seeds base_seed, base_seed + 1, ...
inline std::vector<EpisodeLog> collect_trajectories(const NetworkParams<float>& params, const EnvConfig& cfg,
                                                    std::int64_t n, std::uint64_t base_seed,
                                                    double policy_epsilon = 0.0) {
    std::vector<EpisodeLog> logs;
    logs.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
    for (std::int64_t i = 0; i < n; ++i) {
        logs.push_back(run_episode(params, cfg, base_seed + static_cast<std::uint64_t>(i), policy_epsilon, i));
    }
    return logs;
}

inline EvalStats evaluate(const NetworkParams<float>& params, const EnvConfig& cfg, std::int64_t n_episodes,
                          std::uint64_t base_seed, double policy_epsilon = 0.0) {
    if (n_episodes <= 0) {
        throw UsageError("evaluate needs at least one episode");
    }
    return summarize(collect_trajectories(params, cfg, n_episodes, base_seed, policy_epsilon));
}

} // namespace jetrl
