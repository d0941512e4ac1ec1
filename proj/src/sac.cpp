#include "nearmiss/sac.hpp"

#include <array>
#include <cmath>

namespace nearmiss {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178; // 0.5 * log(2*pi)

struct ActorEval {
    std::array<double, kActionDim> mean, log_sig, sigma, xi, u, tanh_u;
    double log_prob = 0.0;
};

// splits the net output into mean / clamped log-sigma and applies the draw
ActorEval eval_actor(const std::vector<double>& net_out,
                     const std::array<double, kActionDim>& xi) {
    ActorEval e;
    e.xi = xi;
    e.log_prob = 0.0;
    for (int i = 0; i < kActionDim; ++i) {
        e.mean[i] = net_out[static_cast<std::size_t>(i)];
        e.log_sig[i] = std::clamp(net_out[static_cast<std::size_t>(kActionDim + i)],
                                  kLogSigMin, kLogSigMax);
        e.sigma[i] = std::exp(e.log_sig[i]);
        e.u[i] = e.mean[i] + e.sigma[i] * xi[i];
        e.tanh_u[i] = std::tanh(e.u[i]);
        const double sq = 1.0 - e.tanh_u[i] * e.tanh_u[i];
        e.log_prob += -0.5 * xi[i] * xi[i] - e.log_sig[i] - kHalfLog2Pi -
                      std::log(sq + kSquashEps);
    }
    return e;
}

std::array<double, kActionDim> draw_xi(RngStream& rng) {
    std::array<double, kActionDim> xi;
    for (int i = 0; i < kActionDim; ++i) xi[i] = rng.normal();
    return xi;
}

std::vector<double> critic_input(const ObservationVector& obs, const Action& a) {
    std::vector<double> in;
    in.reserve(obs.size() + kActionDim);
    in.insert(in.end(), obs.begin(), obs.end());
    in.push_back(a.p);
    in.push_back(a.delta);
    return in;
}

double critic_value(const MlpParams& q, const ObservationVector& obs, const Action& a) {
    return mlp_forward(q, critic_input(obs, a))[0];
}

} // namespace

PolicySample policy_sample(const ActorParams& actor, const ObservationVector& obs,
                           RngStream& rng) {
    const std::vector<double> out = mlp_forward(actor.net, obs);
    const ActorEval e = eval_actor(out, draw_xi(rng));
    PolicySample s;
    s.action = Action{e.tanh_u[0], e.tanh_u[1]};
    s.log_prob = e.log_prob;
    return s;
}

Action policy_mode(const ActorParams& actor, const ObservationVector& obs) {
    const std::vector<double> out = mlp_forward(actor.net, obs);
    return Action{std::tanh(out[0]), std::tanh(out[1])};
}

std::array<double, kActionDim> policy_component_log_probs_at(
    const ActorParams& actor, const ObservationVector& obs,
    const std::array<double, kActionDim>& u) {
    const std::vector<double> out = mlp_forward(actor.net, obs);
    std::array<double, kActionDim> xi;
    for (int i = 0; i < kActionDim; ++i) {
        const double mean = out[static_cast<std::size_t>(i)];
        const double log_sig = std::clamp(out[static_cast<std::size_t>(kActionDim + i)],
                                          kLogSigMin, kLogSigMax);
        xi[i] = (u[i] - mean) / std::exp(log_sig);
    }
    const ActorEval e = eval_actor(out, xi);
    std::array<double, kActionDim> lp;
    for (int i = 0; i < kActionDim; ++i) {
        const double sq = 1.0 - e.tanh_u[i] * e.tanh_u[i];
        lp[i] = -0.5 * e.xi[i] * e.xi[i] - e.log_sig[i] - kHalfLog2Pi -
                std::log(sq + kSquashEps);
    }
    return lp;
}

void ReplayBuffer::push(const Transition& t) {
    if (data_.size() < capacity_) {
        data_.push_back(t);
    } else {
        data_[next_] = t; // ring overwrite of the oldest entry
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<Transition> ReplayBuffer::sample(std::size_t n, RngStream& rng) const {
    if (data_.empty()) throw std::out_of_range("ReplayBuffer::sample: buffer is empty");
    std::vector<Transition> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(data_[rng.uniform_int(data_.size())]);
    return out;
}

SacState make_sac(int obs_dim, const SacHyper& hp, std::uint64_t seed) {
    SacState s;
    s.hp = hp;
    s.obs_dim = obs_dim;
    RngStream rng(mix_seed(seed, 0x5ac0));

    std::vector<int> actor_sizes{obs_dim};
    actor_sizes.insert(actor_sizes.end(), hp.hidden.begin(), hp.hidden.end());
    actor_sizes.push_back(2 * kActionDim);
    s.actor.net = make_mlp(actor_sizes, rng);

    std::vector<int> critic_sizes{obs_dim + kActionDim};
    critic_sizes.insert(critic_sizes.end(), hp.hidden.begin(), hp.hidden.end());
    critic_sizes.push_back(1);
    s.q1 = make_mlp(critic_sizes, rng);
    s.q2 = make_mlp(critic_sizes, rng);
    s.q1_target = s.q1;
    s.q2_target = s.q2;

    s.adam_actor = make_adam(param_count(s.actor.net));
    s.adam_q1 = make_adam(param_count(s.q1));
    s.adam_q2 = make_adam(param_count(s.q2));
    s.buffer = ReplayBuffer(static_cast<std::size_t>(hp.buffer_capacity));
    return s;
}

std::pair<double, MlpGrads> critic_batch_gradient(const MlpParams& q,
                                                  const std::vector<std::vector<double>>& inputs,
                                                  const std::vector<double>& targets) {
    if (inputs.size() != targets.size() || inputs.empty())
        throw std::invalid_argument("critic_batch_gradient: bad batch");
    const double inv_b = 1.0 / static_cast<double>(inputs.size());
    MlpGrads grads = zero_grads(q);
    MlpTape tape;
    double loss = 0.0;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const double pred = mlp_forward_cached(q, inputs[b], tape)[0];
        const double err = pred - targets[b];
        loss += err * err;
        mlp_backward(q, tape, {2.0 * err * inv_b}, grads);
    }
    return {loss * inv_b, std::move(grads)};
}

std::pair<double, MlpGrads> actor_batch_gradient(const ActorParams& actor,
                                                 const MlpParams& q1, const MlpParams& q2,
                                                 double alpha_ent,
                                                 const std::vector<FixedDraw>& batch) {
    if (batch.empty()) throw std::invalid_argument("actor_batch_gradient: empty batch");
    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const int obs_dim = actor.obs_dim();
    MlpGrads grads = zero_grads(actor.net);
    MlpGrads scratch1 = zero_grads(q1);
    MlpGrads scratch2 = zero_grads(q2);
    MlpTape tape, qtape;
    double loss = 0.0;
    for (const FixedDraw& d : batch) {
        const std::vector<double> out = mlp_forward_cached(actor.net, d.obs, tape);
        const ActorEval e = eval_actor(out, d.xi);
        const Action a{e.tanh_u[0], e.tanh_u[1]};

        const double qv1 = critic_value(q1, d.obs, a);
        const double qv2 = critic_value(q2, d.obs, a);
        const MlpParams& qmin = qv1 <= qv2 ? q1 : q2;
        MlpGrads& qscratch = qv1 <= qv2 ? scratch1 : scratch2;
        loss += alpha_ent * e.log_prob - std::min(qv1, qv2);

        mlp_forward_cached(qmin, critic_input(d.obs, a), qtape);
        const std::vector<double> dq_din = mlp_backward(qmin, qtape, {1.0}, qscratch);

        std::vector<double> gout(2 * kActionDim, 0.0);
        for (int i = 0; i < kActionDim; ++i) {
            const double sq = 1.0 - e.tanh_u[i] * e.tanh_u[i];
            const double dlogprob_du = 2.0 * e.tanh_u[i] * sq / (sq + kSquashEps);
            const double dq_da = dq_din[static_cast<std::size_t>(obs_dim + i)];
            const double g_u = alpha_ent * dlogprob_du - dq_da * sq;
            gout[static_cast<std::size_t>(i)] = g_u * inv_b;
            const double raw_ls = out[static_cast<std::size_t>(kActionDim + i)];
            if (raw_ls > kLogSigMin && raw_ls < kLogSigMax) {
                const double g_ls = -alpha_ent + g_u * e.sigma[i] * e.xi[i];
                gout[static_cast<std::size_t>(kActionDim + i)] = g_ls * inv_b;
            }
        }
        mlp_backward(actor.net, tape, gout, grads);
    }
    return {loss * inv_b, std::move(grads)};
}

namespace {

void adam_step_mlp(MlpParams& p, const MlpGrads& g, AdamState& st, double lr) {
    std::vector<double*> params;
    std::vector<const double*> grads;
    params.reserve(param_count(p));
    grads.reserve(param_count(p));
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
        for (std::size_t i = 0; i < p.layers[li].W.size(); ++i) {
            params.push_back(&p.layers[li].W[i]);
            grads.push_back(&g.layers[li].W[i]);
        }
        for (std::size_t i = 0; i < p.layers[li].b.size(); ++i) {
            params.push_back(&p.layers[li].b[i]);
            grads.push_back(&g.layers[li].b[i]);
        }
    }
    adam_step(params, grads, params.size(), st, lr);
}

} // namespace

std::vector<double> sac_critic_targets(const SacState& state,
                                       const std::vector<Transition>& batch,
                                       RngStream& rng) {
    std::vector<double> targets(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const Transition& t = batch[b];
        double y = t.reward;
        if (!t.done) {
            const std::vector<double> out = mlp_forward(state.actor.net, t.next_obs);
            const ActorEval e = eval_actor(out, draw_xi(rng));
            const Action a_next{e.tanh_u[0], e.tanh_u[1]};
            const double q_min = std::min(critic_value(state.q1_target, t.next_obs, a_next),
                                          critic_value(state.q2_target, t.next_obs, a_next));
            y += state.hp.gamma * (q_min - state.hp.alpha_ent * e.log_prob);
        }
        targets[b] = y;
    }
    return targets;
}

SacLosses sac_update(SacState& state, const std::vector<Transition>& batch, RngStream& rng) {
    if (batch.empty()) throw std::invalid_argument("sac_update: empty batch");
    const double alpha = state.hp.alpha_ent;
    SacLosses losses;

    std::vector<std::vector<double>> critic_in(batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b)
        critic_in[b] = critic_input(batch[b].obs, batch[b].action);
    const std::vector<double> targets = sac_critic_targets(state, batch, rng);

    {
        auto [loss1, g1] = critic_batch_gradient(state.q1, critic_in, targets);
        losses.q1 = loss1;
        adam_step_mlp(state.q1, g1, state.adam_q1, state.hp.lr);
        auto [loss2, g2] = critic_batch_gradient(state.q2, critic_in, targets);
        losses.q2 = loss2;
        adam_step_mlp(state.q2, g2, state.adam_q2, state.hp.lr);
    }

    // actor step against the freshly updated critics; critic params stay fixed
    {
        std::vector<FixedDraw> draws;
        draws.reserve(batch.size());
        for (const Transition& t : batch) draws.push_back({t.obs, draw_xi(rng)});
        auto [aloss, agrads] =
            actor_batch_gradient(state.actor, state.q1, state.q2, alpha, draws);
        losses.actor = aloss;
        adam_step_mlp(state.actor.net, agrads, state.adam_actor, state.hp.lr);
    }

    if (!(std::isfinite(losses.q1) && std::isfinite(losses.q2) && std::isfinite(losses.actor)))
        throw TrainingDivergence("sac_update: non-finite loss", losses);

    polyak_update(state.q1, state.q1_target, state.hp.tau);
    polyak_update(state.q2, state.q2_target, state.hp.tau);
    return losses;
}

StepUpdateResult sac_observe(SacState& state, const Transition& t, RngStream& rng) {
    state.buffer.push(t);
    state.env_steps += 1;
    StepUpdateResult r;
    const bool past_warmup = state.env_steps >= state.hp.warmup &&
                             state.buffer.size() >= static_cast<std::size_t>(state.hp.batch);
    if (past_warmup && state.env_steps % state.hp.steps_per_update == 0) {
        const auto batch = state.buffer.sample(static_cast<std::size_t>(state.hp.batch), rng);
        r.losses = sac_update(state, batch, rng);
        r.updated = true;
    }
    return r;
}

double grad_check(const LossWithGrad& f, std::vector<double> params, double step) {
    const auto [loss0, grad] = f(params);
    (void)loss0;
    if (grad.size() != params.size())
        throw std::invalid_argument("grad_check: gradient length mismatch");
    double max_err = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + step;
        const double lp = f(params).first;
        params[i] = saved - step;
        const double lm = f(params).first;
        params[i] = saved;
        const double fd = (lp - lm) / (2.0 * step);
        const double err = std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd));
        max_err = std::max(max_err, err);
    }
    return max_err;
}

std::uint64_t sac_checksum(const SacState& s) {
    std::uint64_t h = params_checksum(s.actor.net);
    h = h * 1099511628211ULL ^ params_checksum(s.q1);
    h = h * 1099511628211ULL ^ params_checksum(s.q2);
    h = h * 1099511628211ULL ^ params_checksum(s.q1_target);
    h = h * 1099511628211ULL ^ params_checksum(s.q2_target);
    return h;
}

} // namespace nearmiss
