#include "nearmiss/dynamics.hpp"

namespace nearmiss {

ControlInputs map_action(const Action& action, const ControlLimits& limits) {
    ControlInputs c;
    c.a_long = action.p >= 0.0 ? action.p * limits.a_max : action.p * limits.b_max;
    c.phi = action.delta * deg2rad(limits.phi_max_deg);
    return c;
}

VehicleState step_vehicle(const VehicleState& state, const ControlInputs& ctrl,
                          const VehicleDims& dims, double dt) {
    if (!(std::isfinite(state.x) && std::isfinite(state.y) && std::isfinite(state.v) &&
          std::isfinite(state.theta)))
        throw std::domain_error("step_vehicle: non-finite vehicle state");
    if (dt <= 0.0) throw std::domain_error("step_vehicle: dt must be positive");

    const double beta = std::atan(dims.l_r / (dims.l_f + dims.l_r) * std::tan(ctrl.phi));
    const double theta_rad = deg2rad(state.theta);

    VehicleState next = state;
    next.x = state.x + state.v * std::cos(theta_rad + beta) * dt;
    next.y = state.y + state.v * std::sin(theta_rad + beta) * dt;
    const double dtheta_rad = state.v / dims.l_r * std::sin(beta) * dt;
    next.theta = wrap_angle(state.theta + rad2deg(dtheta_rad));
    next.v = std::max(0.0, state.v + ctrl.a_long * dt);
    next.accel = ctrl.a_long;
    next.omega = rad2deg(dtheta_rad) / dt;
    return next;
}

std::vector<SubStep> step_scene(const Scene& scene, const std::vector<Action>& actions,
                                const SimParams& params) {
    if (actions.size() != scene.vehicles.size())
        throw std::invalid_argument("step_scene: one action per vehicle required");
    if (params.frames_per_step < 1)
        throw std::invalid_argument("step_scene: frames_per_step must be >= 1");

    const std::size_t n = scene.vehicles.size();
    std::vector<ControlInputs> controls(n);
    for (std::size_t i = 0; i < n; ++i)
        controls[i] = map_action(actions[i], params.limits);

    std::vector<bool> frozen(n, false);
    std::vector<SubStep> out;
    out.reserve(params.frames_per_step);

    Scene current = scene;
    for (int f = 0; f < params.frames_per_step; ++f) {
        Scene next = current;
        next.t = current.t + params.dt_phys;
        for (std::size_t i = 0; i < n; ++i) {
            if (frozen[i]) continue;
            next.vehicles[i].state = step_vehicle(current.vehicles[i].state, controls[i],
                                                  current.vehicles[i].dims, params.dt_phys);
        }
        SubStep sub;
        sub.geometry = scene_geometry_summary(next, params.occlusion, params.impulse);
        for (const auto& ev : sub.geometry.collisions) {
            frozen[static_cast<std::size_t>(next.index_of(ev.a))] = true;
            frozen[static_cast<std::size_t>(next.index_of(ev.b))] = true;
        }
        sub.scene = next;
        out.push_back(std::move(sub));
        current = out.back().scene;
    }
    return out;
}

} // namespace nearmiss
