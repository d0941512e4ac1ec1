#pragma once

#include <vector>

#include "nearmiss/geometry.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

struct ControlLimits {
    double a_max = 3.0;        // m/s^2 full throttle
    double b_max = 8.0;        // m/s^2 full brake (stronger than a_max)
    double phi_max_deg = 35.0; // front wheel angle at full steer
};

struct ControlInputs {
    double a_long = 0.0; // commanded longitudinal acceleration (m/s^2)
    double phi = 0.0;    // front wheel steering angle (rad)
};

// p >= 0 scales against a_max, p < 0 against b_max; delta scales phi_max.
ControlInputs map_action(const Action& action, const ControlLimits& limits);

// One explicit-Euler step of the kinematic bicycle model with slip angle
// beta = atan(l_r / (l_f + l_r) * tan(phi)). Speed is clamped at 0; theta is
// wrapped; omega is the realized heading rate in deg/s.
VehicleState step_vehicle(const VehicleState& state, const ControlInputs& ctrl,
                          const VehicleDims& dims, double dt);

struct SimParams {
    double dt_phys = 0.05;
    int frames_per_step = 5;
    ControlLimits limits;
    OcclusionParams occlusion;
    ImpulseParams impulse;
};

// One physics sub-step outcome: the post-step scene and its geometry events.
struct SubStep {
    Scene scene;
    GeometrySummary geometry;
};

// Applies map_action once per vehicle, then integrates frames_per_step physics
// sub-steps holding controls constant. Vehicles freeze in place after their
// first collision within the step. Returns one SubStep per physics frame; the
// final entry's scene is the next control-step scene.
std::vector<SubStep> step_scene(const Scene& scene, const std::vector<Action>& actions,
                                const SimParams& params);

} // namespace nearmiss
