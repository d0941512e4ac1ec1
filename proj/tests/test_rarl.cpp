#include <doctest.h>

#include "nearmiss/metrics.hpp"
#include "nearmiss/rarl.hpp"

using namespace nearmiss;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.n_bv = 3;
    cfg.sac.hidden = {16, 16};
    cfg.sac.batch = 8;
    cfg.sac.warmup = 0;
    cfg.sac.buffer_capacity = 5000;
    return cfg;
}

ActorParams zero_actor(const ExperimentConfig& cfg) {
    RngStream rng(0);
    ActorParams a;
    a.net = make_mlp({observation_dim(cfg), 8, 2 * kActionDim}, rng);
    for (auto& l : a.net.layers) {
        std::fill(l.W.begin(), l.W.end(), 0.0);
        std::fill(l.b.begin(), l.b.end(), 0.0);
    }
    return a;
}

// rebuilds per-step reward summaries from a scenario record and replays the
// reward functions over them
void check_rewards_reconstruct(const ScenarioRecord& rec, const ExperimentConfig& cfg) {
    REQUIRE(!rec.frames.empty());
    const int av_id = rec.header.initial.vehicles[0].id;
    AttackHistory history;
    std::size_t i = 0;
    while (i < rec.frames.size()) {
        std::size_t j = i;
        while (j + 1 < rec.frames.size() &&
               rec.frames[j + 1].control_step == rec.frames[i].control_step)
            ++j;
        const LogFrame& last = rec.frames[j];
        REQUIRE(last.step_end);

        StepSummary drive;
        StepSummary attack;
        attack.d_min_current = std::numeric_limits<double>::infinity();
        for (std::size_t k = i; k <= j; ++k) {
            const LogFrame& f = rec.frames[k];
            for (const auto& c : f.events.collisions) {
                if (c.a == av_id || c.b == av_id) {
                    drive.collided = true;
                    attack.collided = true;
                    attack.j_max_step = std::max(attack.j_max_step, c.impulse);
                    drive.j_max_step = attack.j_max_step;
                }
            }
            attack.d_min_current = std::min(attack.d_min_current, f.events.d_min);
            for (int id : f.events.occluding_bv_ids) attack.occl_frames[id] += 1;
        }
        double v_max = -1e300, v_min = 1e300;
        for (const auto& v : last.vehicles) {
            v_max = std::max(v_max, v.v);
            v_min = std::min(v_min, v.v);
            if (v.id == av_id) {
                drive.ego_speed = v.v;
                drive.ego_theta = v.theta;
                attack.ego_speed = v.v;
                attack.ego_theta = v.theta;
            } else {
                attack.bv_speeds.push_back(v.v);
                attack.bv_abs_omega.push_back(std::abs(v.omega));
            }
        }
        drive.v_max = attack.v_max = v_max;
        drive.v_min = attack.v_min = v_min;

        const DriveReward dr = drive_reward(drive, cfg.rewards, cfg.v_bar);
        const AttackReward ar = attack_reward(attack, history, cfg.rewards, cfg.v_bar);
        CHECK(dr.total == doctest::Approx(last.av_reward.total).epsilon(1e-9));
        CHECK(ar.total == doctest::Approx(last.bv_reward.total).epsilon(1e-9));
        i = j + 1;
    }
}

} // namespace

TEST_SUITE("check_termination") {
    ExperimentConfig cfg;

    EpisodeState state_from(const Scene& s, int steps) {
        EpisodeState e;
        e.scene = s;
        e.step_count = steps;
        return e;
    }

    TEST_CASE("AV-BV overlap terminates with collision, ahead of other reasons") {
        Scene s = make_initial_scene(cfg, 0);
        s.vehicles[1].state.x = s.vehicles[0].state.x;
        s.vehicles[1].state.y = s.vehicles[0].state.y - 2.0;
        s.vehicles[0].state.x = -1.0; // also off the road
        s.vehicles[1].state.x = -1.0;
        const auto [done, reason] = check_termination(state_from(s, cfg.h_max), cfg);
        CHECK(done);
        CHECK(reason == TerminationReason::collision);
    }

    TEST_CASE("horizon fires when nothing else applies") {
        const Scene s = make_initial_scene(cfg, 1);
        const auto [done, reason] = check_termination(state_from(s, cfg.h_max), cfg);
        CHECK(done);
        CHECK(reason == TerminationReason::horizon);
        const auto [running, none] = check_termination(state_from(s, cfg.h_max - 1), cfg);
        CHECK(!running);
        CHECK(none == TerminationReason::none);
    }

    TEST_CASE("leaving the roadway laterally") {
        Scene s = make_initial_scene(cfg, 2);
        s.vehicles[0].state.y = -250.0; // clear of all BVs
        s.vehicles[0].state.x = -0.1;
        const auto [done, reason] = check_termination(state_from(s, 0), cfg);
        CHECK(done);
        CHECK(reason == TerminationReason::off_road);
        Scene r = make_initial_scene(cfg, 2);
        r.vehicles[0].state.y = -250.0;
        r.vehicles[0].state.x = r.road.width() + 0.1;
        CHECK(check_termination(state_from(r, 0), cfg).second ==
              TerminationReason::off_road);
    }

    TEST_CASE("passing the segment end") {
        Scene s = make_initial_scene(cfg, 3);
        s.vehicles[0].state.y = -cfg.road.length - 0.5;
        const auto [done, reason] = check_termination(state_from(s, 0), cfg);
        CHECK(done);
        CHECK(reason == TerminationReason::road_end);
    }
}

TEST_SUITE("roll") {
    TEST_CASE("one step emits one AV and n_bv BV transitions") {
        const ExperimentConfig cfg = small_config();
        const ActorParams actor = zero_actor(cfg);
        const PolicyDriver av(actor, false), bv(actor, false);
        RngStream rng(42);
        const RollResult r = roll(cfg, bv, av, 1, rng);
        CHECK(r.av_transitions.size() == 1);
        CHECK(r.bv_transitions.size() == 3);
        CHECK(r.control_steps == 1);
        CHECK(r.episodes.size() == 1);
    }

    TEST_CASE("zero policies on a spread-out start replay the reward arithmetic") {
        const ExperimentConfig cfg = small_config();
        const ActorParams actor = zero_actor(cfg);
        const PolicyDriver av(actor, false), bv(actor, false);

        RngStream probe(42);
        const Scene initial = make_initial_scene(cfg, probe.next_u64());
        RngStream rng(42);
        const RollResult r = roll(cfg, bv, av, 1, rng);

        // zero action: no accel, no steer, speeds and headings unchanged
        double v_max = -1e300, v_min = 1e300;
        for (const auto& v : initial.vehicles) {
            v_max = std::max(v_max, v.state.v);
            v_min = std::min(v_min, v.state.v);
        }
        const double expected = -cfg.rewards.alpha2 *
                                    std::abs(initial.vehicles[0].state.v - cfg.v_bar) -
                                cfg.rewards.alpha4 * (v_max - v_min);
        CHECK(r.av_transitions[0].reward == doctest::Approx(expected).epsilon(1e-9));
        CHECK(r.av_transitions[0].done == false);
    }

    TEST_CASE("identical seeds give bit-identical transition streams") {
        const ExperimentConfig cfg = small_config();
        RngStream init(7);
        ActorParams actor;
        actor.net = make_mlp({observation_dim(cfg), 16, 2 * kActionDim}, init);
        const PolicyDriver av(actor, false), bv(actor, true);
        RngStream r1(9), r2(9);
        const RollResult a = roll(cfg, bv, av, 40, r1);
        const RollResult b = roll(cfg, bv, av, 40, r2);
        REQUIRE(a.bv_transitions.size() == b.bv_transitions.size());
        for (std::size_t i = 0; i < a.bv_transitions.size(); ++i) {
            CHECK(a.bv_transitions[i].reward == b.bv_transitions[i].reward);
            CHECK(a.bv_transitions[i].action.p == b.bv_transitions[i].action.p);
            CHECK(a.bv_transitions[i].action.delta == b.bv_transitions[i].action.delta);
            CHECK(a.bv_transitions[i].obs == b.bv_transitions[i].obs);
        }
    }

    TEST_CASE("episode logs reconstruct the logged rewards") {
        const ExperimentConfig cfg = small_config();
        RngStream init(17);
        ActorParams actor;
        actor.net = make_mlp({observation_dim(cfg), 16, 2 * kActionDim}, init);
        const PolicyDriver av(actor, false), bv(actor, true);
        RngStream rng(19);
        const RollResult r = roll(cfg, bv, av, 120, rng);
        REQUIRE(!r.episodes.empty());
        for (const auto& episode : r.episodes) check_rewards_reconstruct(episode, cfg);
    }
}

TEST_SUITE("pretrain") {
    TEST_CASE("below warmup no gradient step runs") {
        ExperimentConfig cfg = small_config();
        cfg.sac.warmup = 1000;
        RngStream probe(55);
        const SacState fresh = make_sac(observation_dim(cfg), cfg.sac, probe.next_u64());
        RngStream rng(55);
        const PretrainResult result = pretrain(AgentRole::AV, cfg, 20, rng);
        CHECK(sac_checksum(result.sac) == sac_checksum(fresh));
        CHECK(result.sac.buffer.size() == 20);
        CHECK(!result.aborted);
    }

    TEST_CASE("deterministic final checksum") {
        ExperimentConfig cfg = small_config();
        cfg.sac.warmup = 32;
        RngStream r1(77), r2(77);
        const PretrainResult a = pretrain(AgentRole::BV, cfg, 60, r1);
        const PretrainResult b = pretrain(AgentRole::BV, cfg, 60, r2);
        CHECK(sac_checksum(a.sac) == sac_checksum(b.sac));
        CHECK(a.episode_returns == b.episode_returns);
        // BV pretraining pushes one transition per BV per step
        CHECK(a.sac.buffer.size() == 60u * 3u);
    }
}

TEST_SUITE("alternate_train") {
    TEST_CASE("step accounting and the freeze contract") {
        ExperimentConfig cfg = small_config();
        TrainSchedule sched{1, 1, 1, 10};
        RngStream rng(31);
        const SacState av = make_sac(observation_dim(cfg), cfg.sac, 1);
        const SacState bv = make_sac(observation_dim(cfg), cfg.sac, 2);
        const AlternateResult r = alternate_train(sched, cfg, av, bv, rng);
        CHECK(r.env_steps_bv_phase == 10);
        CHECK(r.env_steps_av_phase == 10);
        CHECK(r.rounds.size() == 1);
        CHECK(!r.aborted);
    }

    TEST_CASE("learning passes change only the training agent") {
        ExperimentConfig cfg = small_config();
        cfg.sac.batch = 8;
        cfg.sac.warmup = 0;
        TrainSchedule sched{2, 2, 2, 25};
        RngStream rng(37);
        const SacState av = make_sac(observation_dim(cfg), cfg.sac, 3);
        const SacState bv = make_sac(observation_dim(cfg), cfg.sac, 4);
        const AlternateResult r = alternate_train(sched, cfg, av, bv, rng);
        CHECK(r.rounds.size() == 2);
        CHECK(r.env_steps_bv_phase == 2 * 2 * 25);
        CHECK(r.env_steps_av_phase == 2 * 2 * 25);
        // gradient steps ran, so parameters moved for both roles
        CHECK(params_checksum(r.av.actor.net) != params_checksum(av.actor.net));
        CHECK(params_checksum(r.bv.actor.net) != params_checksum(bv.actor.net));
        // round snapshots differ across rounds
        CHECK(params_checksum(r.rounds[0].bv.actor.net) !=
              params_checksum(r.rounds[1].bv.actor.net));
    }

    TEST_CASE("deterministic given the same seed") {
        ExperimentConfig cfg = small_config();
        cfg.sac.batch = 8;
        TrainSchedule sched{1, 2, 1, 20};
        const SacState av = make_sac(observation_dim(cfg), cfg.sac, 5);
        const SacState bv = make_sac(observation_dim(cfg), cfg.sac, 6);
        RngStream r1(41), r2(41);
        const AlternateResult a = alternate_train(sched, cfg, av, bv, r1);
        const AlternateResult b = alternate_train(sched, cfg, av, bv, r2);
        CHECK(sac_checksum(a.av) == sac_checksum(b.av));
        CHECK(sac_checksum(a.bv) == sac_checksum(b.bv));
    }
}
