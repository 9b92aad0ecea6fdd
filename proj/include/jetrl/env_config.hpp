#pragma once

#include <cmath>
#include <cstdint>

#include "jetrl/errors.hpp"

namespace jetrl {

/// Physical and sensing parameters of the arena. Units are world units and steps.
struct EnvConfig {
    double width = 800.0;
    double height = 800.0;
    double v_min = 1.0;
    double v_max = 5.0;
    double initial_speed = 2.0;
    double turn_rate = 0.05;
    double accel_delta = 0.25;
    double bullet_speed = 8.0;
    double collision_threshold = 10.0;
    double target_zone_radius = 150.0;
    double agent_obs_range = 250.0;
    double enemy_range = 200.0;
    std::int32_t enemy_fire_cooldown = 30;
    double enemy_aim_tolerance = 0.1;
    std::int32_t max_steps = 2000;
    double dt = 1.0;

    double diagonal() const { return std::hypot(width, height); }

    void validate() const {
        auto positive = [](double v, const char* key) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw ConfigError("must be a positive finite number", key);
            }
        };
        positive(width, "world.width");
        positive(height, "world.height");
        positive(v_min, "world.v_min");
        positive(v_max, "world.v_max");
        if (!(v_min < v_max)) {
            throw ConfigError("v_min must be below v_max", "world.v_min");
        }
        if (!(initial_speed >= v_min && initial_speed <= v_max)) {
            throw ConfigError("must lie within [v_min, v_max]", "world.initial_speed");
        }
        positive(turn_rate, "world.turn_rate");
        positive(accel_delta, "world.accel_delta");
        positive(bullet_speed, "world.bullet_speed");
        positive(collision_threshold, "world.collision_threshold");
        positive(target_zone_radius, "world.target_zone_radius");
        positive(agent_obs_range, "world.agent_obs_range");
        positive(enemy_range, "world.enemy_range");
        if (enemy_fire_cooldown < 0) {
            throw ConfigError("must be non-negative", "world.enemy_fire_cooldown");
        }
        positive(enemy_aim_tolerance, "world.enemy_aim_tolerance");
        if (max_steps <= 0) {
            throw ConfigError("must be positive", "world.max_steps");
        }
        positive(dt, "world.dt");
    }
};

} // namespace jetrl
