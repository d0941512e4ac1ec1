#pragma once

#include "nearmiss/config.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

// Intelligent-driver-model acceleration. gap is the bumper-to-bumper distance
// to the leader; +infinity encodes a free road. Output is clamped to
// [-b_max, a_max]; a non-positive gap brakes at -b_max.
double idm_accel(double v, double gap, double lead_v, const IdmParams& params,
                 const ControlLimits& limits);

// Rule-based background-vehicle controller: IDM car following against the
// nearest same-lane vehicle ahead plus proportional-derivative lane centering.
// Deterministic, stateless, never changes lanes.
Action autopilot_action(const Scene& scene, int vehicle_id, const IdmParams& params,
                        const ControlLimits& limits);

} // namespace nearmiss
