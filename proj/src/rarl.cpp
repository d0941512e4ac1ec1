#include "nearmiss/rarl.hpp"

#include "nearmiss/logging.hpp"

namespace nearmiss {

RollResult roll(const ExperimentConfig& config, const Driver& bv, const Driver& av,
                int n_steps, RngStream& rng) {
    if (n_steps < 1) throw std::invalid_argument("roll: n_steps must be >= 1");
    RollResult result;
    auto episode = std::make_unique<Episode>(config, rng.next_u64());
    episode->set_specs(av.spec(), bv.spec());
    double av_return = 0.0, bv_return = 0.0;

    const std::size_t n_vehicles = episode->scene().vehicles.size();
    std::vector<ObservationVector> obs(n_vehicles), next_obs(n_vehicles);

    for (int step = 0; step < n_steps; ++step) {
        const Scene& scene = episode->scene();
        for (std::size_t i = 0; i < n_vehicles; ++i)
            obs[i] = encode_observation(scene, scene.vehicles[i].id, config);

        std::vector<Action> actions(n_vehicles);
        actions[0] = av.act(scene, scene.vehicles[0].id, obs[0], rng);
        for (std::size_t i = 1; i < n_vehicles; ++i)
            actions[i] = bv.act(scene, scene.vehicles[i].id, obs[i], rng);

        const Episode::StepResult sr = episode->step(actions);
        const Scene& next = episode->scene();
        for (std::size_t i = 0; i < n_vehicles; ++i)
            next_obs[i] = encode_observation(next, next.vehicles[i].id, config);

        // collision is the absorbing terminal; off-road, road-end and horizon
        // stops are truncations and keep their bootstrap
        const bool terminal = sr.reason == TerminationReason::collision;
        Transition t_av{obs[0], actions[0], sr.av_reward.total, next_obs[0], terminal};
        result.av_transitions.push_back(std::move(t_av));
        for (std::size_t i = 1; i < n_vehicles; ++i)
            result.bv_transitions.push_back(
                {obs[i], actions[i], sr.bv_reward.total, next_obs[i], terminal});
        av_return += sr.av_reward.total;
        bv_return += sr.bv_reward.total;
        result.control_steps += 1;

        if (sr.done) {
            result.episodes.push_back(episode->record());
            result.av_episode_returns.push_back(av_return);
            result.bv_episode_returns.push_back(bv_return);
            av_return = bv_return = 0.0;
            episode = std::make_unique<Episode>(config, rng.next_u64());
            episode->set_specs(av.spec(), bv.spec());
        }
    }
    if (episode->step_count() > 0) result.episodes.push_back(episode->record());
    return result;
}

PolicySnapshot snapshot_of(const SacState& s) {
    return {s.actor, s.q1, s.q2, s.q1_target, s.q2_target};
}

void restore_snapshot(SacState& dst, const PolicySnapshot& snap) {
    dst.actor = snap.actor;
    dst.q1 = snap.q1;
    dst.q2 = snap.q2;
    dst.q1_target = snap.q1_target;
    dst.q2_target = snap.q2_target;
}

PretrainResult pretrain(AgentRole role, const ExperimentConfig& config, int steps,
                        RngStream& rng) {
    PretrainResult result;
    result.sac = make_sac(observation_dim(config), config.sac, rng.next_u64());
    SacState& sac = result.sac;
    const AutopilotDriver autopilot(config);

    auto episode = std::make_unique<Episode>(config, rng.next_u64());
    double ep_return = 0.0;
    PolicySnapshot last_finite = snapshot_of(sac);
    std::int64_t pushed = 0;

    for (int step = 0; step < steps; ++step) {
        const Scene& scene = episode->scene();
        const std::size_t n = scene.vehicles.size();
        std::vector<ObservationVector> obs(n);
        for (std::size_t i = 0; i < n; ++i)
            obs[i] = encode_observation(scene, scene.vehicles[i].id, config);

        std::vector<Action> actions(n);
        const bool av_learns = role == AgentRole::AV;
        for (std::size_t i = 0; i < n; ++i) {
            const bool learner = av_learns ? i == 0 : i > 0;
            actions[i] = learner
                             ? policy_sample(sac.actor, obs[i], rng).action
                             : autopilot.act(scene, scene.vehicles[i].id, obs[i], rng);
        }

        const Episode::StepResult sr = episode->step(actions);
        const Scene& next = episode->scene();
        const bool terminal = sr.reason == TerminationReason::collision;
        double step_return = 0.0;
        if (av_learns) {
            Transition t{obs[0], actions[0], sr.av_reward.total,
                         encode_observation(next, next.vehicles[0].id, config), terminal};
            sac.buffer.push(t);
            ++pushed;
            step_return = sr.av_reward.total;
        } else {
            // every BV trains the shared policy on its own driving reward
            for (std::size_t i = 1; i < n; ++i) {
                StepSummary sum = make_drive_summary(episode->last_substeps(),
                                                     next.vehicles[i].id);
                const DriveReward r = drive_reward(sum, config.rewards, config.v_bar);
                Transition t{obs[i], actions[i], r.total,
                             encode_observation(next, next.vehicles[i].id, config),
                             terminal};
                sac.buffer.push(t);
                ++pushed;
                step_return += r.total;
            }
            step_return /= static_cast<double>(n - 1);
        }
        ep_return += step_return;

        const bool ready = pushed >= sac.hp.warmup &&
                           sac.buffer.size() >= static_cast<std::size_t>(sac.hp.batch);
        if (ready && (step + 1) % sac.hp.steps_per_update == 0) {
            try {
                const auto batch =
                    sac.buffer.sample(static_cast<std::size_t>(sac.hp.batch), rng);
                sac_update(sac, batch, rng);
                last_finite = snapshot_of(sac);
            } catch (const TrainingDivergence& e) {
                restore_snapshot(sac, last_finite);
                result.aborted = true;
                result.abort_reason = e.what();
                log_error(std::string("pretrain aborted: ") + e.what());
                return result;
            }
        }

        if (sr.done) {
            result.episode_returns.push_back(ep_return);
            ep_return = 0.0;
            episode = std::make_unique<Episode>(config, rng.next_u64());
        }
    }
    return result;
}

namespace {

// one optimization pass: fresh rollout, then proportional gradient steps
bool run_pass(AgentRole training, SacState& learner, const SacState& frozen,
              const ExperimentConfig& config, int n_step, RngStream& rng,
              std::string& abort_reason) {
    const PolicyDriver train_driver(learner.actor, true);
    const PolicyDriver frozen_driver(frozen.actor, false);
    const std::uint64_t frozen_sum = sac_checksum(frozen);

    RollResult rolled = training == AgentRole::BV
                            ? roll(config, train_driver, frozen_driver, n_step, rng)
                            : roll(config, frozen_driver, train_driver, n_step, rng);
    const auto& transitions =
        training == AgentRole::BV ? rolled.bv_transitions : rolled.av_transitions;
    for (const auto& t : transitions) learner.buffer.push(t);

    const bool ready =
        learner.buffer.size() >= static_cast<std::size_t>(
                                     std::max(learner.hp.warmup, learner.hp.batch));
    if (ready) {
        const int n_updates = std::max(1, n_step / learner.hp.steps_per_update);
        for (int u = 0; u < n_updates; ++u) {
            try {
                const auto batch =
                    learner.buffer.sample(static_cast<std::size_t>(learner.hp.batch), rng);
                sac_update(learner, batch, rng);
            } catch (const TrainingDivergence& e) {
                abort_reason = e.what();
                return false;
            }
        }
    }

    if (sac_checksum(frozen) != frozen_sum)
        throw std::logic_error("alternate_train: frozen agent parameters changed");
    return true;
}

} // namespace

AlternateResult alternate_train(const TrainSchedule& schedule, const ExperimentConfig& config,
                                const SacState& init_av, const SacState& init_bv,
                                RngStream& rng) {
    AlternateResult result;
    result.av = init_av;
    result.bv = init_bv;

    for (int round = 1; round <= schedule.n_iter; ++round) {
        result.bv.buffer.clear(); // the opponent changed; old data is off-environment
        for (int j = 0; j < schedule.n_mu; ++j) {
            const std::uint64_t av_sum = sac_checksum(result.av);
            if (!run_pass(AgentRole::BV, result.bv, result.av, config, schedule.n_step, rng,
                          result.abort_reason)) {
                result.aborted = true;
                return result;
            }
            result.env_steps_bv_phase += schedule.n_step;
            if (sac_checksum(result.av) != av_sum)
                throw std::logic_error("alternate_train: AV drifted during BV phase");
        }

        result.av.buffer.clear();
        for (int j = 0; j < schedule.n_v; ++j) {
            const std::uint64_t bv_sum = sac_checksum(result.bv);
            if (!run_pass(AgentRole::AV, result.av, result.bv, config, schedule.n_step, rng,
                          result.abort_reason)) {
                result.aborted = true;
                return result;
            }
            result.env_steps_av_phase += schedule.n_step;
            if (sac_checksum(result.bv) != bv_sum)
                throw std::logic_error("alternate_train: BV drifted during AV phase");
        }

        result.rounds.push_back({round, snapshot_of(result.av), snapshot_of(result.bv)});
        log_info("alternate_train: round " + std::to_string(round) + "/" +
                 std::to_string(schedule.n_iter) + " complete");
    }
    return result;
}

} // namespace nearmiss
