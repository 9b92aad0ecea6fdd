#pragma once

// Deterministic 2D arena: one learning jet, a stationary turret-style enemy,
// a static target, and straight-flying bullets. All state lives in WorldState,
// which is a plain value type so it can be snapshotted by copy.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "jetrl/env_config.hpp"
#include "jetrl/errors.hpp"
#include "jetrl/geometry.hpp"
#include "jetrl/reward.hpp"

namespace jetrl {

enum class Action : std::uint8_t { Noop = 0, TurnLeft, TurnRight, Accelerate, Decelerate, Shoot };

inline constexpr std::size_t action_count = 6;
inline constexpr std::array<Action, action_count> all_actions{Action::Noop,       Action::TurnLeft,
                                                              Action::TurnRight,  Action::Accelerate,
                                                              Action::Decelerate, Action::Shoot};
inline constexpr std::array<std::string_view, action_count> action_names{
    "Noop", "TurnLeft", "TurnRight", "Accelerate", "Decelerate", "Shoot"};

inline constexpr std::size_t index_of(Action a) { return static_cast<std::size_t>(a); }

inline Action action_from_index(std::size_t i) {
    if (i >= action_count) {
        throw UsageError("action index out of range: " + std::to_string(i));
    }
    return static_cast<Action>(i);
}

struct JetState {
    Vec2 pos;
    double heading = 0.0;
    double speed = 0.0;

    friend bool operator==(const JetState&, const JetState&) = default;
};

enum class Owner : std::uint8_t { Agent, Enemy };

struct Bullet {
    Vec2 pos;
    Vec2 velocity;
    Owner owner = Owner::Agent;
    bool fired_in_target_zone = false;

    friend bool operator==(const Bullet&, const Bullet&) = default;
};

struct EnemyState {
    Vec2 pos;
    double heading = 0.0;
    bool alive = true;
    std::int32_t cooldown = 0;

    friend bool operator==(const EnemyState&, const EnemyState&) = default;
};

struct WorldState {
    JetState agent;
    EnemyState enemy;
    Vec2 target_pos;
    std::vector<Bullet> bullets;
    std::int32_t step_count = 0;
    std::int64_t bullets_fired_by_agent = 0;
    double prev_target_distance = 0.0;
    bool terminated = false;
    std::mt19937_64 rng;

    friend bool operator==(const WorldState&, const WorldState&) = default;
};

inline constexpr std::size_t observation_size = 13;

/// Normalized state vector, component order:
/// x, y, heading, v_x, v_y, alpha_target, d_target, alpha_enemy, d_enemy, V_e, V_b, T_z, d_b.
using Observation = std::array<float, observation_size>;

namespace obs_index {
inline constexpr std::size_t x = 0, y = 1, heading = 2, vx = 3, vy = 4, alpha_target = 5, d_target = 6,
                             alpha_enemy = 7, d_enemy = 8, enemy_visible = 9, bullet_visible = 10,
                             target_zone = 11, d_bullet = 12;
}

enum class OutcomeKind : std::uint8_t { Running, AgentDestroyed, TargetDestroyed, Timeout };

inline constexpr std::string_view outcome_name(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::Running: return "running";
    case OutcomeKind::AgentDestroyed: return "agent_destroyed";
    case OutcomeKind::TargetDestroyed: return "target_destroyed";
    case OutcomeKind::Timeout: return "timeout";
    }
    return "unknown";
}

struct StepEvents {
    bool hit_target = false;
    bool hit_enemy = false;
    bool agent_hit = false;
    bool timeout = false;

    friend bool operator==(const StepEvents&, const StepEvents&) = default;
};

struct StepOutcome {
    Observation observation{};
    double reward = 0.0;
    RewardBreakdown breakdown;
    bool terminated = false;
    OutcomeKind outcome = OutcomeKind::Running;
    StepEvents events;
};

namespace detail {
inline bool inside_world(Vec2 p, const EnvConfig& cfg) {
    return p.x >= 0.0 && p.x <= cfg.width && p.y >= 0.0 && p.y <= cfg.height;
}

/// Uniform double in [0, 1) from the top 53 bits; independent of the standard
/// library's distribution implementations.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
} // namespace detail

struct AgentMove {
    JetState jet;
    bool fired = false;
};

/// Applies steering/throttle, then advances the jet one kinematic step.
/// A move that would leave the arena is dropped; heading and speed changes stay.
inline AgentMove apply_agent_action(const JetState& jet, Action action, const EnvConfig& cfg) {
    JetState next = jet;
    switch (action) {
    case Action::TurnLeft: next.heading = wrap_angle(next.heading + cfg.turn_rate); break;
    case Action::TurnRight: next.heading = wrap_angle(next.heading - cfg.turn_rate); break;
    case Action::Accelerate: next.speed = std::clamp(next.speed + cfg.accel_delta, cfg.v_min, cfg.v_max); break;
    case Action::Decelerate: next.speed = std::clamp(next.speed - cfg.accel_delta, cfg.v_min, cfg.v_max); break;
    case Action::Noop:
    case Action::Shoot: break;
    }
    const Vec2 moved = next.pos + (next.speed * cfg.dt) * direction(next.heading);
    if (detail::inside_world(moved, cfg)) {
        next.pos = moved;
    }
    return {next, action == Action::Shoot};
}

inline Bullet spawn_bullet(Vec2 shooter_pos, double shooter_heading, Owner owner, bool in_zone,
                           const EnvConfig& cfg) {
    return Bullet{shooter_pos, cfg.bullet_speed * direction(shooter_heading), owner,
                  owner == Owner::Agent && in_zone};
}

/// Moves every bullet one step and resolves hits. Bullets that leave the arena,
/// hit the enemy, hit the target, or hit the agent are removed.
inline StepEvents advance_bullets(WorldState& world, const EnvConfig& cfg) {
    StepEvents ev;
    std::vector<Bullet> survivors;
    survivors.reserve(world.bullets.size());
    for (Bullet b : world.bullets) {
        b.pos = b.pos + b.velocity;
        if (!detail::inside_world(b.pos, cfg)) {
            continue;
        }
        if (b.owner == Owner::Agent) {
            if (world.enemy.alive && distance(b.pos, world.enemy.pos) < cfg.collision_threshold) {
                world.enemy.alive = false;
                ev.hit_enemy = true;
                continue;
            }
            if (b.fired_in_target_zone && distance(b.pos, world.target_pos) < cfg.collision_threshold) {
                ev.hit_target = true;
                continue;
            }
        } else if (distance(b.pos, world.agent.pos) < cfg.collision_threshold) {
            ev.agent_hit = true;
            continue;
        }
        survivors.push_back(b);
    }
    world.bullets = std::move(survivors);
    return ev;
}

/// Turret behaviour: ignores the agent outside `enemy_range`; otherwise turns
/// toward it at most `turn_rate` per step and fires when aligned and reloaded.
inline void enemy_policy(WorldState& world, const EnvConfig& cfg) {
    EnemyState& e = world.enemy;
    if (!e.alive) {
        return;
    }
    bool fired = false;
    if (distance(world.agent.pos, e.pos) <= cfg.enemy_range) {
        const double rel = relative_angle(e.heading, bearing(e.pos, world.agent.pos));
        e.heading = wrap_angle(e.heading + std::clamp(rel, -cfg.turn_rate, cfg.turn_rate));
        const double remaining = relative_angle(e.heading, bearing(e.pos, world.agent.pos));
        if (std::abs(remaining) < cfg.enemy_aim_tolerance && e.cooldown == 0) {
            world.bullets.push_back(spawn_bullet(e.pos, e.heading, Owner::Enemy, false, cfg));
            e.cooldown = cfg.enemy_fire_cooldown;
            fired = true;
        }
    }
    if (!fired && e.cooldown > 0) {
        --e.cooldown;
    }
}

inline bool in_target_zone(const WorldState& world, const EnvConfig& cfg) {
    return distance(world.agent.pos, world.target_pos) <= cfg.target_zone_radius;
}

inline bool enemy_visible(const WorldState& world, const EnvConfig& cfg) {
    return world.enemy.alive && distance(world.agent.pos, world.enemy.pos) <= cfg.agent_obs_range;
}

inline Observation observe(const WorldState& world, const EnvConfig& cfg) {
    constexpr double pi = std::numbers::pi;
    const JetState& a = world.agent;
    const double diag = cfg.diagonal();
    const double d_target = distance(a.pos, world.target_pos);
    const bool ve = enemy_visible(world, cfg);

    double nearest = cfg.agent_obs_range;
    for (const Bullet& b : world.bullets) {
        if (b.owner == Owner::Enemy) {
            nearest = std::min(nearest, distance(a.pos, b.pos));
        }
    }
    const bool vb = nearest < cfg.agent_obs_range;

    Observation o{};
    o[obs_index::x] = static_cast<float>(a.pos.x / cfg.width);
    o[obs_index::y] = static_cast<float>(a.pos.y / cfg.height);
    o[obs_index::heading] = static_cast<float>(a.heading / pi);
    o[obs_index::vx] = static_cast<float>(a.speed * std::cos(a.heading) / cfg.v_max);
    o[obs_index::vy] = static_cast<float>(a.speed * std::sin(a.heading) / cfg.v_max);
    o[obs_index::alpha_target] =
        static_cast<float>(relative_angle(a.heading, bearing(a.pos, world.target_pos)) / pi);
    o[obs_index::d_target] = static_cast<float>(std::min(d_target / diag, 1.0));
    if (ve) {
        o[obs_index::alpha_enemy] =
            static_cast<float>(relative_angle(a.heading, bearing(a.pos, world.enemy.pos)) / pi);
        o[obs_index::d_enemy] = static_cast<float>(std::min(distance(a.pos, world.enemy.pos) / diag, 1.0));
    } else {
        o[obs_index::alpha_enemy] = 0.0f;
        o[obs_index::d_enemy] = 1.0f;
    }
    o[obs_index::enemy_visible] = ve ? 1.0f : 0.0f;
    o[obs_index::bullet_visible] = vb ? 1.0f : 0.0f;
    o[obs_index::target_zone] = d_target <= cfg.target_zone_radius ? 1.0f : 0.0f;
    o[obs_index::d_bullet] = static_cast<float>(nearest / cfg.agent_obs_range);
    return o;
}

/// Fixed agent spawn: arena centre, heading east.
inline Vec2 agent_spawn(const EnvConfig& cfg) { return {cfg.width / 2.0, cfg.height / 2.0}; }

struct ResetResult {
    WorldState world;
    Observation observation{};
};

/// Starts a new episode. Target and enemy are rejection-sampled uniformly in the
/// arena so that spawn, target and enemy are pairwise at least
/// 1.5 * target_zone_radius apart.
inline ResetResult reset(const EnvConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    constexpr int max_attempts = 100000;
    WorldState w;
    w.rng.seed(seed);
    const Vec2 spawn = agent_spawn(cfg);
    const double sep = 1.5 * cfg.target_zone_radius;
    auto sample_point = [&] {
        const double x = detail::uniform01(w.rng) * cfg.width;
        const double y = detail::uniform01(w.rng) * cfg.height;
        return Vec2{x, y};
    };
    auto place = [&](auto&& ok, const char* what) {
        for (int i = 0; i < max_attempts; ++i) {
            Vec2 p = sample_point();
            if (ok(p)) {
                return p;
            }
        }
        throw ConfigError(std::string("arena too small to place the ") + what + " with the required separation",
                          "world.target_zone_radius");
    };
    w.target_pos = place([&](Vec2 p) { return distance(p, spawn) >= sep; }, "target");
    w.enemy.pos = place([&](Vec2 p) { return distance(p, spawn) >= sep && distance(p, w.target_pos) >= sep; },
                        "enemy");
    w.enemy.heading = wrap_angle((2.0 * detail::uniform01(w.rng) - 1.0) * std::numbers::pi);
    w.enemy.alive = true;
    w.enemy.cooldown = 0;
    w.agent = JetState{spawn, 0.0, cfg.initial_speed};
    w.prev_target_distance = distance(spawn, w.target_pos);
    return {w, observe(w, cfg)};
}

/// Reward inputs from the distance before the step, the world after it, and the events.
inline RewardInputs reward_inputs(double d_prev, const WorldState& cur, const StepEvents& ev,
                                  const EnvConfig& cfg) {
    RewardInputs in;
    in.d_prev = d_prev;
    in.d_cur = distance(cur.agent.pos, cur.target_pos);
    in.in_target_zone = in_target_zone(cur, cfg) ? 1 : 0;
    in.enemy_spotted = enemy_visible(cur, cfg) ? 1 : 0;
    in.bullets_fired = cur.bullets_fired_by_agent;
    in.hit_target = ev.hit_target ? 1 : 0;
    in.hit_enemy = ev.hit_enemy ? 1 : 0;
    in.agent_hit = ev.agent_hit ? 1 : 0;
    in.mission_failed = ev.timeout ? 1 : 0;
    return in;
}

inline RewardInputs build_inputs(const WorldState& prev, const WorldState& cur, const StepEvents& ev,
                                 const EnvConfig& cfg) {
    return reward_inputs(distance(prev.agent.pos, prev.target_pos), cur, ev, cfg);
}

/// Advances the world by one decision. Sub-step order: agent action (and its
/// bullet), enemy turret, bullets and hits, reward, bookkeeping, termination.
/// When the agent is shot in the same step its bullet reaches the target, the
/// agent's destruction wins and the target hit is discarded.
inline StepOutcome step(WorldState& world, Action action, const EnvConfig& cfg) {
    if (world.terminated) {
        throw UsageError("step called on a terminated world; call reset first");
    }
    const double d_prev = world.prev_target_distance;

    const AgentMove move = apply_agent_action(world.agent, action, cfg);
    world.agent = move.jet;
    if (move.fired) {
        world.bullets.push_back(
            spawn_bullet(world.agent.pos, world.agent.heading, Owner::Agent, in_target_zone(world, cfg), cfg));
        ++world.bullets_fired_by_agent;
    }

    enemy_policy(world, cfg);

    StepEvents ev = advance_bullets(world, cfg);
    if (ev.agent_hit) {
        ev.hit_target = false;
    }
    ++world.step_count;
    ev.timeout = !ev.agent_hit && !ev.hit_target && world.step_count >= cfg.max_steps;

    StepOutcome out;
    out.events = ev;
    out.breakdown = compute_reward(reward_inputs(d_prev, world, ev, cfg));
    out.reward = out.breakdown.total();
    world.prev_target_distance = distance(world.agent.pos, world.target_pos);

    if (ev.agent_hit) {
        out.outcome = OutcomeKind::AgentDestroyed;
    } else if (ev.hit_target) {
        out.outcome = OutcomeKind::TargetDestroyed;
    } else if (ev.timeout) {
        out.outcome = OutcomeKind::Timeout;
    }
    out.terminated = out.outcome != OutcomeKind::Running;
    world.terminated = out.terminated;
    out.observation = observe(world, cfg);
    return out;
}

/// Independent value copy of the world, including the generator state.
inline WorldState snapshot(const WorldState& world) { return world; }

inline void restore(WorldState& world, const WorldState& saved) { world = saved; }

} // namespace jetrl
