#include "nearmiss/env.hpp"

#include <limits>

namespace nearmiss {

std::pair<bool, TerminationReason> check_termination(const EpisodeState& episode,
                                                     const ExperimentConfig& config) {
    const Scene& s = episode.scene;
    const SceneVehicle& av = s.av();
    const ObbPose av_box = obb_of(av.state, av.dims);
    for (std::size_t j = 1; j < s.vehicles.size(); ++j)
        if (obb_overlap(av_box, obb_of(s.vehicles[j].state, s.vehicles[j].dims)))
            return {true, TerminationReason::collision};
    if (av.state.x < 0.0 || av.state.x > s.road.width())
        return {true, TerminationReason::off_road};
    if (av.state.y <= -s.road.length) return {true, TerminationReason::road_end};
    if (episode.step_count >= config.h_max) return {true, TerminationReason::horizon};
    return {false, TerminationReason::none};
}

StepSummary make_drive_summary(const std::vector<SubStep>& substeps, int subject_id) {
    StepSummary sum;
    const Scene& end = substeps.back().scene;
    for (const auto& sub : substeps) {
        if (sub.geometry.vehicle_collided(subject_id)) sum.collided = true;
        sum.j_max_step = std::max(sum.j_max_step, sub.geometry.av_j_max());
    }
    const SceneVehicle* subject = end.find(subject_id);
    if (!subject) throw std::out_of_range("make_drive_summary: unknown vehicle id");
    sum.ego_speed = subject->state.v;
    sum.ego_theta = subject->state.theta;
    sum.v_max = -std::numeric_limits<double>::infinity();
    sum.v_min = std::numeric_limits<double>::infinity();
    for (const auto& v : end.vehicles) {
        sum.v_max = std::max(sum.v_max, v.state.v);
        sum.v_min = std::min(sum.v_min, v.state.v);
    }
    return sum;
}

StepSummary make_attack_summary(const std::vector<SubStep>& substeps) {
    StepSummary sum;
    sum.d_min_current = std::numeric_limits<double>::infinity();
    const Scene& end = substeps.back().scene;
    for (const auto& sub : substeps) {
        const GeometrySummary& g = sub.geometry;
        if (g.av_collided()) sum.collided = true;
        sum.j_max_step = std::max(sum.j_max_step, g.av_j_max());
        sum.d_min_current = std::min(sum.d_min_current, g.d_min_current);
        for (int id : g.occluding_bv_ids) sum.occl_frames[id] += 1;
    }
    sum.ego_speed = end.av().state.v;
    sum.ego_theta = end.av().state.theta;
    sum.v_max = -std::numeric_limits<double>::infinity();
    sum.v_min = std::numeric_limits<double>::infinity();
    for (const auto& v : end.vehicles) {
        sum.v_max = std::max(sum.v_max, v.state.v);
        sum.v_min = std::min(sum.v_min, v.state.v);
    }
    for (std::size_t j = 1; j < end.vehicles.size(); ++j) {
        sum.bv_speeds.push_back(end.vehicles[j].state.v);
        sum.bv_abs_omega.push_back(std::abs(end.vehicles[j].state.omega));
    }
    return sum;
}

Episode::Episode(const ExperimentConfig& config, std::uint64_t scene_seed)
    : config_(config) {
    state_.scene = make_initial_scene(config, scene_seed);
    record_.header.config_hash = config_hash(config);
    record_.header.scene_seed = scene_seed;
    record_.header.dt_phys = config.sim.dt_phys;
    record_.header.frames_per_step = config.sim.frames_per_step;
    record_.header.initial = state_.scene;
}

Episode::StepResult Episode::step(const std::vector<Action>& actions) {
    if (state_.done) throw std::logic_error("Episode::step: episode already terminated");

    const Scene before = state_.scene;
    last_substeps_ = step_scene(before, actions, config_.sim);
    state_.scene = last_substeps_.back().scene;
    state_.step_count += 1;

    StepResult result;
    result.av_summary = make_drive_summary(last_substeps_, before.av().id);
    result.attack_summary = make_attack_summary(last_substeps_);
    result.av_reward = drive_reward(result.av_summary, config_.rewards, config_.v_bar);
    result.bv_reward =
        attack_reward(result.attack_summary, state_.attack, config_.rewards, config_.v_bar);

    const auto [done, reason] = check_termination(state_, config_);
    state_.done = done;
    state_.reason = reason;
    result.done = done;
    result.reason = reason;

    // live metric accumulation and the frame records
    double prev_x = before.av().state.x;
    double prev_y = before.av().state.y;
    const int av_id = before.av().id;
    for (const auto& sub : last_substeps_) {
        const GeometrySummary& g = sub.geometry;
        for (const auto& c : g.collisions) {
            if (!g.involves(c, av_id)) continue;
            const std::pair<int, int> pair{std::min(c.a, c.b), std::max(c.a, c.b)};
            bool seen = false;
            for (const auto& p : live_.collided_pairs) seen = seen || p == pair;
            if (!seen) live_.collided_pairs.push_back(pair);
            live_.j_max = std::max(live_.j_max, c.impulse);
        }
        if (!g.occluding_bv_ids.empty()) live_.obf += 1;
        live_.duration_s += config_.sim.dt_phys;
        const auto& av_state = sub.scene.av().state;
        live_.av_distance_m += std::hypot(av_state.x - prev_x, av_state.y - prev_y);
        prev_x = av_state.x;
        prev_y = av_state.y;

        LogFrame frame;
        frame.t = sub.scene.t;
        frame.control_step = state_.step_count - 1;
        for (std::size_t i = 0; i < sub.scene.vehicles.size(); ++i) {
            const auto& v = sub.scene.vehicles[i];
            frame.vehicles.push_back({v.id, v.state.x, v.state.y, v.state.v, v.state.theta,
                                      v.state.accel, v.state.omega, actions[i].p,
                                      actions[i].delta});
        }
        frame.events.collisions = g.collisions;
        frame.events.occluding_bv_ids = g.occluding_bv_ids;
        frame.events.d_min = g.d_min_current;
        record_.frames.push_back(std::move(frame));
    }
    record_.frames.back().step_end = true;
    record_.frames.back().av_reward = result.av_reward;
    record_.frames.back().bv_reward = result.bv_reward;
    record_.termination = state_.reason;
    return result;
}

} // namespace nearmiss
