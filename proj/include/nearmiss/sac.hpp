#pragma once

#include <array>
#include <functional>
#include <utility>

#include "nearmiss/config.hpp"
#include "nearmiss/mlp.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

constexpr int kActionDim = 2;
constexpr double kLogSigMin = -20.0;
constexpr double kLogSigMax = 2.0;
constexpr double kSquashEps = 1e-6;

// Gaussian policy head: one network mapping obs -> [mean, log_sigma] pairs;
// actions are tanh-squashed draws. log_sigma is clamped to [-20, 2].
struct ActorParams {
    MlpParams net; // output dim 2 * kActionDim

    int obs_dim() const { return net.input_dim(); }
};

struct PolicySample {
    Action action;
    double log_prob = 0.0;
};

// Draws u ~ N(mean, sigma) per component and squashes with tanh; log_prob is
// the Gaussian log-density minus the tanh change-of-variables correction.
PolicySample policy_sample(const ActorParams& actor, const ObservationVector& obs,
                           RngStream& rng);

// Deterministic evaluation action tanh(mean(obs)).
Action policy_mode(const ActorParams& actor, const ObservationVector& obs);

// Per-component log-densities of the squashed action tanh(u) evaluated at a
// chosen pre-squash point u. Matches the formula used by policy_sample.
std::array<double, kActionDim> policy_component_log_probs_at(
    const ActorParams& actor, const ObservationVector& obs,
    const std::array<double, kActionDim>& u);

struct Transition {
    ObservationVector obs;
    Action action;
    double reward = 0.0;
    ObservationVector next_obs;
    bool done = false;
};

class ReplayBuffer {
public:
    ReplayBuffer() = default;
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(const Transition& t);
    // uniform with replacement; throws std::out_of_range when empty
    std::vector<Transition> sample(std::size_t n, RngStream& rng) const;
    std::size_t size() const { return data_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return data_.empty(); }
    void clear() { data_.clear(); next_ = 0; }

private:
    std::size_t capacity_ = 1;
    std::size_t next_ = 0;
    std::vector<Transition> data_;
};

struct SacState {
    ActorParams actor;
    MlpParams q1, q2;
    MlpParams q1_target, q2_target;
    AdamState adam_actor, adam_q1, adam_q2;
    ReplayBuffer buffer;
    SacHyper hp;
    int obs_dim = 0;
    std::int64_t env_steps = 0; // transitions seen, gates warmup
};

SacState make_sac(int obs_dim, const SacHyper& hp, std::uint64_t seed);

struct SacLosses {
    double q1 = 0.0;
    double q2 = 0.0;
    double actor = 0.0;
};

// Soft Bellman regression targets y = r + gamma * (1 - done) *
// (min(q1_targ, q2_targ)(s', a') - alpha_ent * log pi(a'|s')) with a fresh
// next action per transition. Reads the target networks only.
std::vector<double> sac_critic_targets(const SacState& state,
                                       const std::vector<Transition>& batch, RngStream& rng);

class TrainingDivergence : public std::runtime_error {
public:
    TrainingDivergence(const std::string& msg, SacLosses losses)
        : std::runtime_error(msg), losses(losses) {}
    SacLosses losses;
};

// One SAC step on a batch: critics regress to the twin-target soft Bellman
// value, the actor ascends min(q1, q2) - alpha_ent * log pi with
// reparameterized actions, then targets are polyak-averaged.
SacLosses sac_update(SacState& state, const std::vector<Transition>& batch, RngStream& rng);

// convenience: push, then update every steps_per_update once past warmup
struct StepUpdateResult {
    bool updated = false;
    SacLosses losses;
};
StepUpdateResult sac_observe(SacState& state, const Transition& t, RngStream& rng);

// One reparameterized draw with its noise pinned, so losses are deterministic
// functions of the parameters (required by the finite-difference check).
struct FixedDraw {
    ObservationVector obs;
    std::array<double, kActionDim> xi;
};

// Batch loss and parameter gradient of the actor objective
// mean(alpha * log pi(a|s) - min(q1, q2)(s, a)) at pinned noise. Shared by
// sac_update and the gradient checks.
std::pair<double, MlpGrads> actor_batch_gradient(const ActorParams& actor,
                                                 const MlpParams& q1, const MlpParams& q2,
                                                 double alpha_ent,
                                                 const std::vector<FixedDraw>& batch);

// Batch mean-squared-error loss and gradient of one critic against fixed
// regression targets.
std::pair<double, MlpGrads> critic_batch_gradient(const MlpParams& q,
                                                  const std::vector<std::vector<double>>& inputs,
                                                  const std::vector<double>& targets);

// Loss with its analytic gradient at the given parameter vector.
using LossWithGrad =
    std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)>;

// Central-difference check of the analytic gradient; returns
// max_i |g_i - fd_i| / max(1, |fd_i|).
double grad_check(const LossWithGrad& f, std::vector<double> params, double step = 1e-5);

// checksum over actor and critic parameters, used by the freeze assertions
std::uint64_t sac_checksum(const SacState& s);

} // namespace nearmiss
