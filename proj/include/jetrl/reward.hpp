#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>

#include "jetrl/errors.hpp"

namespace jetrl {

/// Everything the per-step reward depends on. Indicators are 0 or 1.
struct RewardInputs {
    double d_prev = 0.0;
    double d_cur = 0.0;
    int in_target_zone = 0; // I_tz
    int enemy_spotted = 0;  // I_ez
    long bullets_fired = 0; // b, cumulative this episode
    int hit_target = 0;     // I_ht
    int hit_enemy = 0;      // I_he
    int agent_hit = 0;      // I_eh
    int mission_failed = 0; // I_ms, timeout only
};

/// Signed contribution of every reward term. `total()` is their sum.
struct RewardBreakdown {
    double step_cost = 0.0;
    double moving_away = 0.0;
    double outside_zone = 0.0;
    double enemy_unseen = 0.0;
    double ammo_waste = 0.0;
    double agent_hit = 0.0;
    double mission_failed = 0.0;
    double approach = 0.0;
    double zone_bonus = 0.0;
    double enemy_seen = 0.0;
    double target_hit = 0.0;
    double enemy_hit = 0.0;

    static constexpr std::size_t term_count = 12;
    static constexpr std::array<std::string_view, term_count> names{
        "step_cost", "moving_away", "outside_zone", "enemy_unseen", "ammo_waste", "agent_hit",
        "mission_failed", "approach", "zone_bonus", "enemy_seen", "target_hit", "enemy_hit"};

    std::array<double, term_count> terms() const {
        return {step_cost,  moving_away,    outside_zone, enemy_unseen, ammo_waste, agent_hit,
                mission_failed, approach, zone_bonus,   enemy_seen,   target_hit, enemy_hit};
    }

    double total() const {
        double sum = 0.0;
        for (double t : terms()) {
            sum += t;
        }
        return sum;
    }
};

namespace detail {
inline void require_indicator(int v, const char* name) {
    if (v != 0 && v != 1) {
        throw DomainError(std::string("reward indicator ") + name + " must be 0 or 1");
    }
}
} // namespace detail

inline RewardBreakdown compute_reward(const RewardInputs& in) {
    if (!(in.d_prev >= 0.0) || !(in.d_cur >= 0.0) || !std::isfinite(in.d_prev) || !std::isfinite(in.d_cur)) {
        throw DomainError("reward distances must be finite and non-negative");
    }
    if (in.bullets_fired < 0) {
        throw DomainError("bullet count must be non-negative");
    }
    detail::require_indicator(in.in_target_zone, "in_target_zone");
    detail::require_indicator(in.enemy_spotted, "enemy_spotted");
    detail::require_indicator(in.hit_target, "hit_target");
    detail::require_indicator(in.hit_enemy, "hit_enemy");
    detail::require_indicator(in.agent_hit, "agent_hit");
    detail::require_indicator(in.mission_failed, "mission_failed");

    RewardBreakdown r;
    r.step_cost = -0.1;
    r.moving_away = -15.0 * std::max(0.0, in.d_cur - in.d_prev);
    r.outside_zone = -1.0 * (1 - in.in_target_zone);
    r.enemy_unseen = -0.5 * (1 - in.enemy_spotted);
    r.ammo_waste = -0.5 * static_cast<double>(std::max(0L, in.bullets_fired - 50));
    r.agent_hit = -500.0 * in.agent_hit;
    r.mission_failed = -1000.0 * in.mission_failed;
    r.approach = 10.0 * (in.d_prev - in.d_cur);
    r.zone_bonus = 2.0 * in.in_target_zone;
    r.enemy_seen = 1.0 * in.enemy_spotted;
    r.target_hit = 200.0 * in.hit_target;
    r.enemy_hit = 100.0 * in.hit_enemy;
    return r;
}

} // namespace jetrl
