#pragma once

// Double DQN training loop over the jet arena.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "jetrl/env_config.hpp"
#include "jetrl/errors.hpp"
#include "jetrl/qnet.hpp"
#include "jetrl/replay.hpp"
#include "jetrl/sim.hpp"

namespace jetrl {

struct TrainConfig {
    std::int64_t total_steps = 1'000'000;
    double lr = 5e-5;
    double gamma = 0.99;
    std::int64_t buffer_capacity = 500'000;
    std::int64_t batch_size = 256;
    std::int64_t target_update_interval = 5000;
    double eps_start = 1.0;
    double eps_final = 0.1;
    double exploration_fraction = 0.7;
    double max_grad_norm = 10.0;
    std::int64_t learn_start = 256;
    /// One gradient update every `train_frequency` environment steps.
    std::int64_t train_frequency = 1;
    std::uint64_t seed = 0;
    std::int64_t metrics_window = 10'000;

    void validate() const {
        if (total_steps <= 0) throw ConfigError("must be positive", "train.total_steps");
        if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("must be positive", "train.lr");
        if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("must lie in (0, 1)", "train.gamma");
        if (buffer_capacity <= 0) throw ConfigError("must be positive", "train.buffer_capacity");
        if (batch_size <= 0) throw ConfigError("must be positive", "train.batch_size");
        if (target_update_interval <= 0) throw ConfigError("must be positive", "train.target_update_interval");
        if (!(eps_start >= 0.0 && eps_start <= 1.0)) throw ConfigError("must lie in [0, 1]", "train.eps_start");
        if (!(eps_final >= 0.0 && eps_final <= eps_start))
            throw ConfigError("must lie in [0, eps_start]", "train.eps_final");
        if (!(exploration_fraction > 0.0 && exploration_fraction <= 1.0))
            throw ConfigError("must lie in (0, 1]", "train.exploration_fraction");
        if (!(max_grad_norm > 0.0)) throw ConfigError("must be positive", "train.max_grad_norm");
        if (learn_start < 0) throw ConfigError("must be non-negative", "train.learn_start");
        if (train_frequency <= 0) throw ConfigError("must be positive", "train.train_frequency");
        if (metrics_window <= 0) throw ConfigError("must be positive", "train.metrics_window");
    }
};

/// Linearly decaying exploration rate, flat at eps_final after the exploration phase.
inline double epsilon_at(std::int64_t step, const TrainConfig& cfg) {
    const double horizon = cfg.exploration_fraction * static_cast<double>(cfg.total_steps);
    const double progress = static_cast<double>(std::max<std::int64_t>(step, 0)) / horizon;
    return std::max(cfg.eps_final, cfg.eps_start - (cfg.eps_start - cfg.eps_final) * progress);
}

template <typename Scalar>
Matrix<Scalar> observation_row(const Observation& obs) {
    Matrix<Scalar> m(1, static_cast<Eigen::Index>(observation_size));
    for (std::size_t j = 0; j < observation_size; ++j) {
        m(0, static_cast<Eigen::Index>(j)) = static_cast<Scalar>(obs[j]);
    }
    return m;
}

template <typename Scalar>
std::array<Scalar, action_count> q_values(const NetworkParams<Scalar>& params, const Observation& obs) {
    const Matrix<Scalar> q = forward(params, observation_row<Scalar>(obs));
    if (static_cast<std::size_t>(q.cols()) != action_count) {
        throw UsageError("network output width must equal the action count");
    }
    std::array<Scalar, action_count> out{};
    for (std::size_t j = 0; j < action_count; ++j) {
        out[j] = q(0, static_cast<Eigen::Index>(j));
    }
    return out;
}

template <typename Scalar>
Action greedy_action(const std::array<Scalar, action_count>& q) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < action_count; ++j) {
        if (q[j] > q[best]) {
            best = j;
        }
    }
    return static_cast<Action>(best);
}

/// Epsilon-greedy choice. The exploration coin is drawn only when epsilon > 0,
/// so a greedy policy consumes no randomness.
template <typename Scalar>
Action select_action(const NetworkParams<Scalar>& params, const Observation& obs, double epsilon,
                     std::mt19937_64& rng) {
    if (epsilon > 0.0) {
        if (detail::uniform01(rng) < epsilon) {
            return static_cast<Action>(rng() % action_count);
        }
    }
    return greedy_action(q_values(params, obs));
}

template <typename Scalar>
Matrix<Scalar> stack_observations(const std::vector<Transition>& batch, bool next) {
    Matrix<Scalar> m(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(observation_size));
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Observation& o = next ? batch[i].next_obs : batch[i].obs;
        for (std::size_t j = 0; j < observation_size; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<Scalar>(o[j]);
        }
    }
    return m;
}

/// Double-Q regression targets: the online network picks the next action,
/// the target network scores it. Terminal transitions do not bootstrap.
template <typename Scalar>
std::vector<Scalar> compute_targets(const NetworkParams<Scalar>& online, const NetworkParams<Scalar>& target,
                                    const std::vector<Transition>& batch, double gamma) {
    std::vector<Scalar> y(batch.size());
    if (batch.empty()) {
        return y;
    }
    const Matrix<Scalar> next = stack_observations<Scalar>(batch, true);
    const Matrix<Scalar> q_online = forward(online, next);
    const Matrix<Scalar> q_target = forward(target, next);
    const auto g = static_cast<Scalar>(gamma);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto r = static_cast<Scalar>(batch[i].reward);
        if (batch[i].terminal) {
            y[i] = r;
            continue;
        }
        const auto row = static_cast<Eigen::Index>(i);
        const auto best = static_cast<Eigen::Index>(argmax_row(q_online.row(row)));
        y[i] = r + g * q_target(row, best);
    }
    return y;
}

/// Hard copy of the online network into the target network on interval boundaries.
template <typename Scalar>
bool sync_target(const NetworkParams<Scalar>& online, NetworkParams<Scalar>& target, std::int64_t step,
                 std::int64_t interval = 5000) {
    if (interval > 0 && step % interval == 0) {
        target = online;
        return true;
    }
    return false;
}

struct EpisodeSummary {
    std::int64_t end_step = 0; // environment steps completed when the episode ended
    std::int32_t length = 0;
    double total_reward = 0.0;
    OutcomeKind outcome = OutcomeKind::Running;
};

struct MetricsRow {
    std::int64_t step = 0;
    double epsilon = 0.0;
    double mean_reward = std::numeric_limits<double>::quiet_NaN();
    double reward_std = std::numeric_limits<double>::quiet_NaN();
    double mean_ep_length = std::numeric_limits<double>::quiet_NaN();
    double loss = std::numeric_limits<double>::quiet_NaN();
    std::int64_t successes = 0;
    std::int64_t failures = 0;
};

struct TrainHooks {
    std::function<void(const MetricsRow&)> on_metrics;
    /// Called every `checkpoint_interval` steps (when non-zero) with the online network and optimizer.
    std::function<void(std::int64_t, const NetworkParams<float>&, const AdamState<float>&)> on_checkpoint;
    std::int64_t checkpoint_interval = 0;
};

struct TrainResult {
    NetworkParams<float> online;
    AdamState<float> adam;
    std::vector<MetricsRow> metrics;
    std::vector<EpisodeSummary> episodes;
};

/// Mutable training state: environment, buffer, both networks, optimizer, and RNG streams.
class Trainer {
  public:
    Trainer(const EnvConfig& env_cfg, const TrainConfig& cfg)
        : env_cfg_(env_cfg), cfg_(cfg), buffer_(static_cast<std::size_t>(cfg.buffer_capacity)),
          rng_(cfg.seed), reset_rng_(cfg.seed ^ 0x9E3779B97F4A7C15ULL) {
        env_cfg_.validate();
        cfg_.validate();
        online_ = init_params<float>(cfg.seed);
        adam_ = AdamState<float>::for_params(online_);
        sync_target(online_, target_, 0, cfg_.target_update_interval);
        start_episode();
    }

    /// One sampled minibatch update of the online network. Empty when the
    /// buffer has not reached `learn_start` / `batch_size` yet.
    std::optional<float> train_step() {
        if (buffer_.size() < static_cast<std::size_t>(cfg_.learn_start)) {
            return std::nullopt;
        }
        auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
        if (!batch) {
            return std::nullopt;
        }
        return update_on(*batch);
    }

    /// Gradient step on an explicit batch: targets, backward, clip, Adam.
    float update_on(const std::vector<Transition>& batch) {
        const std::vector<float> targets = compute_targets(online_, target_, batch, cfg_.gamma);
        const Matrix<float> obs = stack_observations<float>(batch, false);
        std::vector<std::uint8_t> actions(batch.size());
        for (std::size_t i = 0; i < batch.size(); ++i) {
            actions[i] = batch[i].action;
        }
        auto result = backward<float>(online_, obs, actions, targets);
        const Gradients<float> clipped = clip_global_norm(std::move(result.grads), cfg_.max_grad_norm);
        adam_step(online_, adam_, clipped, cfg_.lr);
        return result.mean_loss;
    }

    /// Acts once in the environment, stores the transition, learns, and syncs.
    void env_step() {
        const double eps = epsilon_at(steps_done_, cfg_);
        const Action a = select_action(online_, obs_, eps, rng_);
        const StepOutcome out = step(world_, a, env_cfg_);
        buffer_.push({obs_, static_cast<std::uint8_t>(index_of(a)), static_cast<float>(out.reward),
                      out.observation, out.terminated});
        obs_ = out.observation;
        ep_reward_ += out.reward;
        ++ep_length_;
        ++steps_done_;

        if (out.terminated) {
            finish_episode(out.outcome);
        }
        if (steps_done_ % cfg_.train_frequency == 0) {
            if (auto loss = train_step()) {
                window_loss_sum_ += *loss;
                ++window_updates_;
            }
        }
        sync_target(online_, target_, steps_done_, cfg_.target_update_interval);
        if (steps_done_ % cfg_.metrics_window == 0) {
            emit_metrics();
        }
        if (hooks_.checkpoint_interval > 0 && hooks_.on_checkpoint && steps_done_ % hooks_.checkpoint_interval == 0) {
            hooks_.on_checkpoint(steps_done_, online_, adam_);
        }
    }

    TrainResult run(TrainHooks hooks = {}) {
        hooks_ = std::move(hooks);
        while (steps_done_ < cfg_.total_steps) {
            env_step();
        }
        if (steps_done_ % cfg_.metrics_window != 0) {
            emit_metrics();
        }
        return {online_, adam_, metrics_, episodes_};
    }

    const NetworkParams<float>& online() const { return online_; }
    const NetworkParams<float>& target() const { return target_; }
    const AdamState<float>& adam() const { return adam_; }
    const ReplayBuffer& buffer() const { return buffer_; }
    ReplayBuffer& buffer() { return buffer_; }
    std::int64_t steps_done() const { return steps_done_; }
    const std::vector<EpisodeSummary>& episodes() const { return episodes_; }
    const std::vector<MetricsRow>& metrics() const { return metrics_; }

  private:
    void start_episode() {
        auto r = reset(env_cfg_, reset_rng_());
        world_ = std::move(r.world);
        obs_ = r.observation;
        ep_reward_ = 0.0;
        ep_length_ = 0;
    }

    void finish_episode(OutcomeKind outcome) {
        episodes_.push_back({steps_done_, ep_length_, ep_reward_, outcome});
        window_rewards_.push_back(ep_reward_);
        window_length_sum_ += ep_length_;
        if (outcome == OutcomeKind::TargetDestroyed) {
            ++window_successes_;
        } else {
            ++window_failures_;
        }
        start_episode();
    }

    void emit_metrics() {
        MetricsRow row;
        row.step = steps_done_;
        row.epsilon = epsilon_at(steps_done_, cfg_);
        if (!window_rewards_.empty()) {
            const double n = static_cast<double>(window_rewards_.size());
            double sum = 0.0;
            for (double r : window_rewards_) sum += r;
            const double mean = sum / n;
            double var = 0.0;
            for (double r : window_rewards_) var += (r - mean) * (r - mean);
            row.mean_reward = mean;
            row.reward_std = std::sqrt(var / n);
            row.mean_ep_length = static_cast<double>(window_length_sum_) / n;
        }
        if (window_updates_ > 0) {
            row.loss = window_loss_sum_ / static_cast<double>(window_updates_);
        }
        row.successes = window_successes_;
        row.failures = window_failures_;
        metrics_.push_back(row);
        if (hooks_.on_metrics) {
            hooks_.on_metrics(row);
        }
        window_rewards_.clear();
        window_length_sum_ = 0;
        window_loss_sum_ = 0.0;
        window_updates_ = 0;
        window_successes_ = 0;
        window_failures_ = 0;
    }

    EnvConfig env_cfg_;
    TrainConfig cfg_;
    NetworkParams<float> online_;
    NetworkParams<float> target_;
    AdamState<float> adam_;
    ReplayBuffer buffer_;
    std::mt19937_64 rng_;
    std::mt19937_64 reset_rng_;
    TrainHooks hooks_;

    WorldState world_;
    Observation obs_{};
    double ep_reward_ = 0.0;
    std::int32_t ep_length_ = 0;
    std::int64_t steps_done_ = 0;

    std::vector<EpisodeSummary> episodes_;
    std::vector<MetricsRow> metrics_;
    std::vector<double> window_rewards_;
    std::int64_t window_length_sum_ = 0;
    double window_loss_sum_ = 0.0;
    std::int64_t window_updates_ = 0;
    std::int64_t window_successes_ = 0;
    std::int64_t window_failures_ = 0;
};

inline TrainResult train(const EnvConfig& env_cfg, const TrainConfig& cfg, TrainHooks hooks = {}) {
    Trainer trainer(env_cfg, cfg);
    return trainer.run(std::move(hooks));
}

} // namespace jetrl
