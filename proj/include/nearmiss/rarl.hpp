#pragma once

#include <memory>

#include "nearmiss/autopilot.hpp"
#include "nearmiss/env.hpp"
#include "nearmiss/sac.hpp"

namespace nearmiss {

// Action source for one side of the matchup. Policy snapshots act either
// stochastically (training side) or deterministically (frozen side).
class Driver {
public:
    virtual ~Driver() = default;
    virtual Action act(const Scene& scene, int vehicle_id, const ObservationVector& obs,
                       RngStream& rng) const = 0;
    virtual std::string spec() const = 0;
};

class AutopilotDriver : public Driver {
public:
    explicit AutopilotDriver(const ExperimentConfig& config) : config_(config) {}
    Action act(const Scene& scene, int vehicle_id, const ObservationVector&,
               RngStream&) const override {
        return autopilot_action(scene, vehicle_id, config_.idm, config_.sim.limits);
    }
    std::string spec() const override { return "autopilot"; }

private:
    const ExperimentConfig& config_;
};

class PolicyDriver : public Driver {
public:
    PolicyDriver(const ActorParams& actor, bool stochastic, std::string spec = "policy")
        : actor_(&actor), stochastic_(stochastic), spec_(std::move(spec)) {}
    Action act(const Scene&, int, const ObservationVector& obs, RngStream& rng) const override {
        return stochastic_ ? policy_sample(*actor_, obs, rng).action
                           : policy_mode(*actor_, obs);
    }
    std::string spec() const override { return spec_; }

private:
    const ActorParams* actor_;
    bool stochastic_;
    std::string spec_;
};

struct RollResult {
    std::vector<Transition> av_transitions; // one per control step, drive reward
    std::vector<Transition> bv_transitions; // one per BV per step, shared attack reward
    std::vector<ScenarioRecord> episodes;   // the last entry may be unterminated
    std::vector<double> av_episode_returns; // completed episodes only
    std::vector<double> bv_episode_returns;
    int control_steps = 0;
};

// Steps the environment exactly n_steps control steps, auto-resetting on
// episode termination with scene seeds drawn from rng.
RollResult roll(const ExperimentConfig& config, const Driver& bv, const Driver& av,
                int n_steps, RngStream& rng);

struct PretrainResult {
    SacState sac;
    std::vector<double> episode_returns; // training curve
    bool aborted = false;                // divergence; sac holds the last finite params
    std::string abort_reason;
};

// SAC pretraining of one role under the driving reward, opponents on
// autopilot. Updates start after warmup and run every steps_per_update
// control steps.
PretrainResult pretrain(AgentRole role, const ExperimentConfig& config, int steps,
                        RngStream& rng);

// Parameter-only snapshot emitted once per round for each role.
struct PolicySnapshot {
    ActorParams actor;
    MlpParams q1, q2, q1_target, q2_target;
};

PolicySnapshot snapshot_of(const SacState& s);
void restore_snapshot(SacState& dst, const PolicySnapshot& snap);

struct RoundCheckpoint {
    int round = 0; // 1-based
    PolicySnapshot av, bv;
};

struct AlternateResult {
    std::vector<RoundCheckpoint> rounds;
    SacState av, bv; // final learner states
    int env_steps_bv_phase = 0;
    int env_steps_av_phase = 0;
    bool aborted = false;
    std::string abort_reason;
};

// Algorithm of the alternating two-phase optimization: per round, n_mu BV
// passes on the attack reward with the AV frozen, then n_v AV passes on the
// drive reward with the BV frozen. Each pass rolls n_step control steps and
// then applies n_step / steps_per_update SAC updates to the training agent.
// The frozen agent's parameters are asserted bitwise unchanged per pass.
AlternateResult alternate_train(const TrainSchedule& schedule, const ExperimentConfig& config,
                                const SacState& init_av, const SacState& init_bv,
                                RngStream& rng);

} // namespace nearmiss
