#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "jetrl/sim.hpp"

using namespace jetrl;

namespace {
constexpr double pi = std::numbers::pi;

WorldState quiet_world(const EnvConfig& cfg) {
    // Enemy far away and dead, so nothing interferes with the agent.
    WorldState w = reset(cfg, 1).world;
    w.enemy.alive = false;
    w.bullets.clear();
    return w;
}
} // namespace

TEST(Geometry, WrapAngle) {
    EXPECT_DOUBLE_EQ(wrap_angle(0.0), 0.0);
    EXPECT_NEAR(wrap_angle(3 * pi), pi, 1e-12);
    EXPECT_NEAR(wrap_angle(-3 * pi / 2), pi / 2, 1e-12);
    EXPECT_DOUBLE_EQ(wrap_angle(-pi), pi);
    EXPECT_THROW(wrap_angle(std::nan("")), DomainError);
    EXPECT_THROW(wrap_angle(INFINITY), DomainError);
}

TEST(Geometry, WrapAngleStaysInRangeAndCongruent) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    for (int i = 0; i < 10000; ++i) {
        const double t = u(rng);
        const double w = wrap_angle(t);
        ASSERT_GT(w, -pi);
        ASSERT_LE(w, pi);
        const double k = (t - w) / (2 * pi);
        ASSERT_NEAR(k, std::round(k), 1e-9);
    }
}

TEST(Geometry, Distance) {
    EXPECT_DOUBLE_EQ(distance({0, 0}, {3, 4}), 5.0);
    EXPECT_DOUBLE_EQ(distance({1, 1}, {1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(distance({-2, 0}, {1, 0}), 3.0);
    EXPECT_THROW(distance({NAN, 0}, {1, 0}), DomainError);
}

TEST(Geometry, BearingAndRelativeAngle) {
    EXPECT_DOUBLE_EQ(bearing({0, 0}, {1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(bearing({0, 0}, {0, 1}), pi / 2);
    EXPECT_DOUBLE_EQ(bearing({0, 0}, {-1, 0}), pi);
    EXPECT_DOUBLE_EQ(bearing({2, 2}, {2, 2}), 0.0);

    EXPECT_DOUBLE_EQ(relative_angle(0.0, pi / 2), pi / 2);
    EXPECT_DOUBLE_EQ(relative_angle(pi / 2, pi / 2), 0.0);
    // wrap(-3pi/4 - 3pi/4) = wrap(-3pi/2) = pi/2
    EXPECT_NEAR(relative_angle(3 * pi / 4, -3 * pi / 4), pi / 2, 1e-12);
}

TEST(AgentAction, KinematicsAndClamp) {
    EnvConfig cfg;
    JetState jet{{100, 100}, 0.0, 2.0};
    auto m = apply_agent_action(jet, Action::Noop, cfg);
    EXPECT_DOUBLE_EQ(m.jet.pos.x, 102.0);
    EXPECT_DOUBLE_EQ(m.jet.pos.y, 100.0);
    EXPECT_FALSE(m.fired);

    jet.speed = cfg.v_max;
    EXPECT_DOUBLE_EQ(apply_agent_action(jet, Action::Accelerate, cfg).jet.speed, cfg.v_max);
    jet.speed = cfg.v_min;
    EXPECT_DOUBLE_EQ(apply_agent_action(jet, Action::Decelerate, cfg).jet.speed, cfg.v_min);
    jet.speed = 2.0;
    EXPECT_DOUBLE_EQ(apply_agent_action(jet, Action::Accelerate, cfg).jet.speed, 2.25);

    EXPECT_NEAR(apply_agent_action(jet, Action::TurnLeft, cfg).jet.heading, 0.05, 1e-15);
    EXPECT_NEAR(apply_agent_action(jet, Action::TurnRight, cfg).jet.heading, -0.05, 1e-15);
    EXPECT_TRUE(apply_agent_action(jet, Action::Shoot, cfg).fired);
}

TEST(AgentAction, BoundaryNullifiesMoveButKeepsControls) {
    EnvConfig cfg;
    const JetState jet{{cfg.width, 300}, 0.0, 3.0};
    for (Action a : all_actions) {
        const auto m = apply_agent_action(jet, a, cfg);
        EXPECT_EQ(m.jet.pos, jet.pos) << action_names[index_of(a)];
    }
    EXPECT_DOUBLE_EQ(apply_agent_action(jet, Action::Accelerate, cfg).jet.speed, 3.25);
    EXPECT_NEAR(apply_agent_action(jet, Action::TurnLeft, cfg).jet.heading, 0.05, 1e-15);
}

TEST(Bullets, SpawnVelocity) {
    EnvConfig cfg;
    const Bullet b0 = spawn_bullet({1, 2}, 0.0, Owner::Agent, true, cfg);
    EXPECT_DOUBLE_EQ(b0.velocity.x, 8.0);
    EXPECT_DOUBLE_EQ(b0.velocity.y, 0.0);
    EXPECT_TRUE(b0.fired_in_target_zone);
    const Bullet b1 = spawn_bullet({1, 2}, pi / 2, Owner::Agent, false, cfg);
    EXPECT_NEAR(b1.velocity.x, 0.0, 1e-12);
    EXPECT_DOUBLE_EQ(b1.velocity.y, 8.0);
    const Bullet b2 = spawn_bullet({1, 2}, pi / 4, Owner::Enemy, true, cfg);
    EXPECT_NEAR(b2.velocity.x, 8.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(b2.velocity.y, 8.0 / std::sqrt(2.0), 1e-12);
    EXPECT_FALSE(b2.fired_in_target_zone);
}

TEST(Bullets, TargetHitRequiresZoneTag) {
    EnvConfig cfg;
    WorldState w = quiet_world(cfg);
    w.target_pos = {500, 500};
    // After one step of +8 in x the bullet sits 5 units from the target centre.
    w.bullets = {Bullet{{487, 500}, {8, 0}, Owner::Agent, true}};
    auto ev = advance_bullets(w, cfg);
    EXPECT_TRUE(ev.hit_target);
    EXPECT_TRUE(w.bullets.empty());

    w.bullets = {Bullet{{487, 500}, {8, 0}, Owner::Agent, false}};
    ev = advance_bullets(w, cfg);
    EXPECT_FALSE(ev.hit_target);
    EXPECT_EQ(w.bullets.size(), 1u);
}

TEST(Bullets, LeavingWorldIsRemovedSilently) {
    EnvConfig cfg;
    WorldState w = quiet_world(cfg);
    w.bullets = {Bullet{{cfg.width - 2, 10}, {8, 0}, Owner::Agent, true}};
    const auto ev = advance_bullets(w, cfg);
    EXPECT_EQ(ev, StepEvents{});
    EXPECT_TRUE(w.bullets.empty());
}

TEST(Bullets, EnemyHitAndAgentHit) {
    EnvConfig cfg;
    WorldState w = reset(cfg, 3).world;
    w.enemy.pos = {600, 600};
    w.agent.pos = {100, 100};
    w.bullets = {Bullet{{592, 600}, {8, 0}, Owner::Agent, false},
                 Bullet{{92, 100}, {8, 0}, Owner::Enemy, false}};
    const auto ev = advance_bullets(w, cfg);
    EXPECT_TRUE(ev.hit_enemy);
    EXPECT_FALSE(w.enemy.alive);
    EXPECT_TRUE(ev.agent_hit);
    EXPECT_TRUE(w.bullets.empty());
}

TEST(Enemy, InertOutsideRange) {
    EnvConfig cfg;
    WorldState w = reset(cfg, 4).world;
    w.enemy.pos = {700, 700};
    w.enemy.heading = 1.0;
    w.agent.pos = {100, 100};
    enemy_policy(w, cfg);
    EXPECT_DOUBLE_EQ(w.enemy.heading, 1.0);
    EXPECT_TRUE(w.bullets.empty());
}

TEST(Enemy, TurnsTowardAgentWithoutFiringWhenMisaligned) {
    EnvConfig cfg;
    WorldState w = reset(cfg, 4).world;
    w.enemy.pos = {400, 400};
    w.agent.pos = {500, 400}; // bearing 0
    w.enemy.heading = 0.5;
    enemy_policy(w, cfg);
    EXPECT_NEAR(w.enemy.heading, 0.45, 1e-12);
    EXPECT_TRUE(w.bullets.empty());
}

TEST(Enemy, FiresWhenAlignedAndReloaded) {
    EnvConfig cfg;
    WorldState w = reset(cfg, 4).world;
    w.enemy.pos = {400, 400};
    w.agent.pos = {500, 400};
    w.enemy.heading = 0.02;
    w.enemy.cooldown = 0;
    enemy_policy(w, cfg);
    ASSERT_EQ(w.bullets.size(), 1u);
    EXPECT_EQ(w.bullets[0].owner, Owner::Enemy);
    EXPECT_EQ(w.enemy.cooldown, cfg.enemy_fire_cooldown);
    enemy_policy(w, cfg);
    EXPECT_EQ(w.bullets.size(), 1u);
    EXPECT_EQ(w.enemy.cooldown, cfg.enemy_fire_cooldown - 1);
}

TEST(Observe, ZoneAndSentinels) {
    EnvConfig cfg;
    WorldState w = quiet_world(cfg);
    w.agent.pos = w.target_pos;
    Observation o = observe(w, cfg);
    EXPECT_EQ(o[obs_index::target_zone], 1.0f);
    EXPECT_EQ(o[obs_index::d_target], 0.0f);
    EXPECT_EQ(o[obs_index::bullet_visible], 0.0f);
    EXPECT_EQ(o[obs_index::d_bullet], 1.0f);

    w = reset(cfg, 9).world;
    w.agent.pos = {100, 100};
    w.enemy.pos = {100 + cfg.agent_obs_range + 1, 100};
    o = observe(w, cfg);
    EXPECT_EQ(o[obs_index::enemy_visible], 0.0f);
    EXPECT_EQ(o[obs_index::alpha_enemy], 0.0f);
    EXPECT_EQ(o[obs_index::d_enemy], 1.0f);

    w.enemy.pos = {100 + cfg.agent_obs_range - 1, 100};
    o = observe(w, cfg);
    EXPECT_EQ(o[obs_index::enemy_visible], 1.0f);
    EXPECT_NEAR(o[obs_index::d_enemy], (cfg.agent_obs_range - 1) / cfg.diagonal(), 1e-6);
}

TEST(Observe, NearestEnemyBullet) {
    EnvConfig cfg;
    WorldState w = quiet_world(cfg);
    w.agent.pos = {100, 100};
    w.bullets = {Bullet{{200, 100}, {0, 8}, Owner::Enemy, false}, Bullet{{150, 100}, {0, 8}, Owner::Enemy, false},
                 Bullet{{110, 100}, {0, 8}, Owner::Agent, true}};
    const Observation o = observe(w, cfg);
    EXPECT_EQ(o[obs_index::bullet_visible], 1.0f);
    EXPECT_NEAR(o[obs_index::d_bullet], 50.0 / cfg.agent_obs_range, 1e-7);
}

TEST(Reset, DeterministicAndInitial) {
    EnvConfig cfg;
    const auto a = reset(cfg, 42);
    const auto b = reset(cfg, 42);
    EXPECT_EQ(a.world, b.world);
    EXPECT_EQ(a.observation, b.observation);
    EXPECT_EQ(a.world.step_count, 0);
    EXPECT_TRUE(a.world.bullets.empty());
    EXPECT_EQ(a.world.bullets_fired_by_agent, 0);
    EXPECT_DOUBLE_EQ(a.world.agent.speed, cfg.initial_speed);
    EXPECT_DOUBLE_EQ(a.world.agent.heading, 0.0);
    EXPECT_DOUBLE_EQ(a.world.prev_target_distance, distance(a.world.agent.pos, a.world.target_pos));
    EXPECT_NE(reset(cfg, 43).world.target_pos, a.world.target_pos);
}

TEST(Reset, SeparationHoldsOverManySeeds) {
    EnvConfig cfg;
    const double sep = 1.5 * cfg.target_zone_radius;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        const WorldState w = reset(cfg, s).world;
        ASSERT_GE(distance(w.agent.pos, w.target_pos), sep);
        ASSERT_GE(distance(w.agent.pos, w.enemy.pos), sep);
        ASSERT_GE(distance(w.target_pos, w.enemy.pos), sep);
        ASSERT_TRUE(w.target_pos.x >= 0 && w.target_pos.x <= cfg.width);
        ASSERT_TRUE(w.target_pos.y >= 0 && w.target_pos.y <= cfg.height);
    }
}

TEST(Reset, ArenaTooSmallIsConfigError) {
    EnvConfig cfg;
    cfg.width = 200;
    cfg.height = 200;
    EXPECT_THROW(reset(cfg, 1), ConfigError);
}

TEST(Step, TimeoutAtMaxSteps) {
    EnvConfig cfg;
    cfg.max_steps = 2000;
    WorldState w = quiet_world(cfg);
    w.target_pos = {10, 10};
    w.agent.pos = {790, 790};
    StepOutcome out;
    int n = 0;
    while (!w.terminated) {
        out = step(w, n % 2 ? Action::TurnLeft : Action::TurnRight, cfg);
        ++n;
    }
    EXPECT_EQ(n, 2000);
    EXPECT_EQ(out.outcome, OutcomeKind::Timeout);
    EXPECT_TRUE(out.events.timeout);
    EXPECT_DOUBLE_EQ(out.breakdown.mission_failed, -1000.0);
    EXPECT_THROW(step(w, Action::Noop, cfg), UsageError);
}

TEST(Step, ShootingFromZoneDestroysTarget) {
    EnvConfig cfg;
    WorldState w = quiet_world(cfg);
    w.agent = JetState{{400, 400}, 0.0, 1.0};
    w.target_pos = {500, 400};
    w.prev_target_distance = 100.0;
    StepOutcome out = step(w, Action::Shoot, cfg);
    EXPECT_EQ(w.bullets_fired_by_agent, 1);
    ASSERT_EQ(w.bullets.size(), 1u);
    EXPECT_TRUE(w.bullets[0].fired_in_target_zone);
    while (!out.terminated) {
        out = step(w, Action::Noop, cfg);
    }
    EXPECT_EQ(out.outcome, OutcomeKind::TargetDestroyed);
    EXPECT_DOUBLE_EQ(out.breakdown.target_hit, 200.0);
}

TEST(Step, ShootingFromOutsideZoneNeverScores) {
    EnvConfig cfg;
    WorldState w = quiet_world(cfg);
    w.agent = JetState{{100, 400}, 0.0, 1.0};
    w.target_pos = {700, 400};
    w.prev_target_distance = 600.0;
    step(w, Action::Shoot, cfg);
    ASSERT_FALSE(w.bullets[0].fired_in_target_zone);
    for (int i = 0; i < 120 && !w.terminated; ++i) {
        const auto out = step(w, Action::Decelerate, cfg);
        ASSERT_FALSE(out.events.hit_target);
    }
}

TEST(Step, EnemyBulletDestroysAgent) {
    EnvConfig cfg;
    WorldState w = reset(cfg, 2).world;
    w.agent = JetState{{300, 300}, pi / 2, 1.0};
    w.enemy.pos = {300, 200};
    w.enemy.heading = pi / 2;
    w.enemy.cooldown = 0;
    StepOutcome out;
    do {
        out = step(w, Action::Noop, cfg);
    } while (!out.terminated);
    EXPECT_EQ(out.outcome, OutcomeKind::AgentDestroyed);
    EXPECT_DOUBLE_EQ(out.breakdown.agent_hit, -500.0);
    EXPECT_DOUBLE_EQ(out.breakdown.mission_failed, 0.0);
}

TEST(Snapshot, IndependentAndDeterministic) {
    EnvConfig cfg;
    WorldState w = reset(cfg, 11).world;
    const WorldState snap = snapshot(w);
    step(w, Action::Shoot, cfg);
    EXPECT_NE(w, snap);
    WorldState a = snap;
    WorldState b = snapshot(snap);
    const auto oa = step(a, Action::TurnLeft, cfg);
    const auto ob = step(b, Action::TurnLeft, cfg);
    EXPECT_EQ(oa.observation, ob.observation);
    EXPECT_EQ(oa.reward, ob.reward);
    EXPECT_EQ(a, b);
    restore(w, snap);
    EXPECT_EQ(w, snap);
}

// Randomized action sequences: physical invariants hold at every step, and
// agent bullets fired outside the zone never score.
TEST(SimProperties, FuzzedInvariants) {
    EnvConfig cfg;
    std::mt19937_64 rng(2024);
    WorldState w = reset(cfg, 0).world;
    std::uint64_t episode = 0;
    for (int i = 0; i < 10000; ++i) {
        const bool any_untagged = std::any_of(w.bullets.begin(), w.bullets.end(), [](const Bullet& b) {
            return b.owner == Owner::Agent && !b.fired_in_target_zone;
        });
        const bool any_tagged = std::any_of(w.bullets.begin(), w.bullets.end(), [](const Bullet& b) {
            return b.owner == Owner::Agent && b.fired_in_target_zone;
        });
        const Action a = static_cast<Action>(rng() % action_count);
        const bool shot_in_zone = a == Action::Shoot && in_target_zone(w, cfg);
        const auto out = step(w, a, cfg);
        if (out.events.hit_target) {
            ASSERT_TRUE(any_tagged || shot_in_zone);
        }
        if (!any_tagged && !shot_in_zone) {
            ASSERT_FALSE(out.events.hit_target) << "untagged bullets present: " << any_untagged;
        }
        ASSERT_GE(w.agent.speed, cfg.v_min);
        ASSERT_LE(w.agent.speed, cfg.v_max);
        ASSERT_GT(w.agent.heading, -pi);
        ASSERT_LE(w.agent.heading, pi);
        ASSERT_TRUE(w.agent.pos.x >= 0 && w.agent.pos.x <= cfg.width);
        ASSERT_TRUE(w.agent.pos.y >= 0 && w.agent.pos.y <= cfg.height);
        ASSERT_LE(w.step_count, cfg.max_steps);
        const Observation& o = out.observation;
        ASSERT_EQ(o[obs_index::target_zone] == 1.0f, distance(w.agent.pos, w.target_pos) <= cfg.target_zone_radius);
        if (o[obs_index::enemy_visible] == 1.0f) {
            ASSERT_LE(distance(w.agent.pos, w.enemy.pos), cfg.agent_obs_range);
        }
        for (std::size_t k = 0; k < observation_size; ++k) {
            ASSERT_GE(o[k], -1.0f);
            ASSERT_LE(o[k], 1.0f);
        }
        const int terminal_events = out.events.hit_target + out.events.agent_hit + out.events.timeout;
        ASSERT_LE(terminal_events, 1);
        ASSERT_EQ(out.terminated, out.outcome != OutcomeKind::Running);
        if (out.terminated) {
            w = reset(cfg, ++episode).world;
        }
    }
}

TEST(SimProperties, SameSeedSameActionsBitwiseIdentical) {
    EnvConfig cfg;
    auto run = [&] {
        std::vector<Observation> seq;
        std::mt19937_64 rng(77);
        auto [w, o] = reset(cfg, 5);
        seq.push_back(o);
        for (int i = 0; i < 3000 && !w.terminated; ++i) {
            seq.push_back(step(w, static_cast<Action>(rng() % action_count), cfg).observation);
        }
        return seq;
    };
    EXPECT_EQ(run(), run());
}
