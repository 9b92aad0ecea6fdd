#pragma once

// Run configuration in a line-based text format:
//
//   # comment
//   world.turn_rate = 0.05
//   train.total_steps = 250000
//   io.out_dir = runs/seed7
//
// Every key is optional; unknown keys and malformed values are rejected with
// the key name in the error.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>

#include "jetrl/env_config.hpp"
#include "jetrl/errors.hpp"
#include "jetrl/trainer.hpp"

namespace jetrl {

struct EpisodeSection {
    std::int64_t episodes = 1000;
    std::uint64_t base_seed = 0;
};

struct IoSection {
    std::string out_dir = "runs";
    /// Steps between intermediate checkpoints; 0 writes only the final one.
    std::int64_t checkpoint_interval = 50'000;
};

struct RunConfig {
    EnvConfig world;
    TrainConfig train;
    EpisodeSection eval;
    EpisodeSection explain;
    IoSection io;

    void validate() const {
        world.validate();
        train.validate();
        if (eval.episodes <= 0) throw ConfigError("must be positive", "eval.episodes");
        if (explain.episodes <= 0) throw ConfigError("must be positive", "explain.episodes");
        if (io.checkpoint_interval < 0) throw ConfigError("must be non-negative", "io.checkpoint_interval");
        if (io.out_dir.empty()) throw ConfigError("must not be empty", "io.out_dir");
    }
};

/// Defaults, with io.out_dir taken from JETRL_OUT when that variable is set.
inline RunConfig default_run_config() {
    RunConfig cfg;
    if (const char* env = std::getenv("JETRL_OUT"); env != nullptr && *env != '\0') {
        cfg.io.out_dir = env;
    }
    return cfg;
}

namespace detail {

using FieldRef = std::variant<double*, std::int32_t*, std::int64_t*, std::uint64_t*, std::string*>;

inline std::map<std::string, FieldRef, std::less<>> config_fields(RunConfig& c) {
    return {
        {"world.width", &c.world.width},
        {"world.height", &c.world.height},
        {"world.v_min", &c.world.v_min},
        {"world.v_max", &c.world.v_max},
        {"world.initial_speed", &c.world.initial_speed},
        {"world.turn_rate", &c.world.turn_rate},
        {"world.accel_delta", &c.world.accel_delta},
        {"world.bullet_speed", &c.world.bullet_speed},
        {"world.collision_threshold", &c.world.collision_threshold},
        {"world.target_zone_radius", &c.world.target_zone_radius},
        {"world.agent_obs_range", &c.world.agent_obs_range},
        {"world.enemy_range", &c.world.enemy_range},
        {"world.enemy_fire_cooldown", &c.world.enemy_fire_cooldown},
        {"world.enemy_aim_tolerance", &c.world.enemy_aim_tolerance},
        {"world.max_steps", &c.world.max_steps},
        {"world.dt", &c.world.dt},
        {"train.total_steps", &c.train.total_steps},
        {"train.lr", &c.train.lr},
        {"train.gamma", &c.train.gamma},
        {"train.buffer_capacity", &c.train.buffer_capacity},
        {"train.batch_size", &c.train.batch_size},
        {"train.target_update_interval", &c.train.target_update_interval},
        {"train.eps_start", &c.train.eps_start},
        {"train.eps_final", &c.train.eps_final},
        {"train.exploration_fraction", &c.train.exploration_fraction},
        {"train.max_grad_norm", &c.train.max_grad_norm},
        {"train.learn_start", &c.train.learn_start},
        {"train.train_frequency", &c.train.train_frequency},
        {"train.seed", &c.train.seed},
        {"train.metrics_window", &c.train.metrics_window},
        {"eval.episodes", &c.eval.episodes},
        {"eval.base_seed", &c.eval.base_seed},
        {"explain.episodes", &c.explain.episodes},
        {"explain.base_seed", &c.explain.base_seed},
        {"io.out_dir", &c.io.out_dir},
        {"io.checkpoint_interval", &c.io.checkpoint_interval},
    };
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view text, const std::string& key) {
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ConfigError("cannot parse '" + std::string(text) + "' as a number of the expected type", key);
    }
    return value;
}

} // namespace detail

/// Assigns one `section.key` in place. Throws ConfigError for unknown keys or bad values.
inline void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
    auto fields = detail::config_fields(cfg);
    const auto it = fields.find(key);
    const std::string k(key);
    if (it == fields.end()) {
        throw ConfigError("unknown configuration key", k);
    }
    std::visit(
        [&](auto* field) {
            using T = std::remove_pointer_t<decltype(field)>;
            if constexpr (std::is_same_v<T, std::string>) {
                *field = std::string(value);
            } else {
                *field = detail::parse_number<T>(value, k);
            }
        },
        it->second);
}

inline RunConfig parse_config(std::string_view text, RunConfig base = default_run_config()) {
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = detail::trim(line);
        if (s.empty() || s.front() == '#') {
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'section.key = value'");
        }
        set_config_value(base, detail::trim(s.substr(0, eq)), detail::trim(s.substr(eq + 1)));
    }
    base.validate();
    return base;
}

inline RunConfig load_config(const std::filesystem::path& path, RunConfig base = default_run_config()) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file", path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

} // namespace jetrl
