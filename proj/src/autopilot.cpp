#include "nearmiss/autopilot.hpp"

#include <limits>

#include "nearmiss/dynamics.hpp"

namespace nearmiss {

double idm_accel(double v, double gap, double lead_v, const IdmParams& params,
                 const ControlLimits& limits) {
    if (gap <= 0.0) return -limits.b_max;
    double interaction = 0.0;
    if (std::isfinite(gap)) {
        const double dv = v - lead_v;
        const double s_star = params.s0 + v * params.T +
                              v * dv / (2.0 * std::sqrt(params.a_idm * params.b_idm));
        interaction = (s_star / gap) * (s_star / gap);
    }
    const double ratio = v / params.v0;
    const double a = params.a_idm * (1.0 - ratio * ratio * ratio * ratio - interaction);
    return std::clamp(a, -limits.b_max, limits.a_max);
}

Action autopilot_action(const Scene& scene, int vehicle_id, const IdmParams& params,
                        const ControlLimits& limits) {
    const int idx = scene.index_of(vehicle_id);
    if (idx < 0)
        throw std::out_of_range("autopilot_action: unknown vehicle id " +
                                std::to_string(vehicle_id));
    const SceneVehicle& self = scene.vehicles[static_cast<std::size_t>(idx)];
    const int lane = scene.road.lane_of(self.state.x);

    // nearest vehicle ahead in the same lane; travel runs toward -y
    const SceneVehicle* leader = nullptr;
    for (const auto& other : scene.vehicles) {
        if (other.id == vehicle_id) continue;
        if (scene.road.lane_of(other.state.x) != lane) continue;
        if (other.state.y >= self.state.y) continue;
        if (!leader || other.state.y > leader->state.y) leader = &other;
    }

    double gap = std::numeric_limits<double>::infinity();
    double lead_v = self.state.v;
    if (leader) {
        gap = (self.state.y - leader->state.y) -
              0.5 * (self.dims.length + leader->dims.length);
        lead_v = leader->state.v;
    }
    const double a = idm_accel(self.state.v, gap, lead_v, params, limits);
    const double p = a >= 0.0 ? a / limits.a_max : a / limits.b_max;

    const double lateral_error = self.state.x - scene.road.lane_center(lane);
    const double heading_error = wrap_angle(self.state.theta + 90.0);
    const double delta = -params.k_p * lateral_error - params.k_d * heading_error;

    return Action{p, delta};
}

} // namespace nearmiss
