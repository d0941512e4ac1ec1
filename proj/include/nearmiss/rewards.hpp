#pragma once

#include <limits>
#include <map>
#include <vector>

#include "nearmiss/config.hpp"

namespace nearmiss {

// Per-control-step inputs to the reward functions, assembled from the frame
// events and end-of-step states. occl_frames maps BV id -> physics frames in
// which that BV occluded the AV during the step.
struct StepSummary {
    bool collided = false;     // subject vehicle involved in a collision
    double j_max_step = 0.0;   // max AV-BV impulse this step (kg*m/s)
    double d_min_current = 0.0; // min AV-BV boundary gap this step (m)
    std::map<int, int> occl_frames;
    double ego_speed = 0.0;    // subject speed (m/s)
    double ego_theta = -90.0;  // subject heading (deg)
    std::vector<double> bv_speeds;
    std::vector<double> bv_abs_omega; // |omega| per BV (deg/s)
    double v_max = 0.0;        // over all vehicles
    double v_min = 0.0;
};

// Running historical minimum gap within an episode.
struct AttackHistory {
    double d_min_hist = std::numeric_limits<double>::infinity();
};

struct DriveReward {
    double collision = 0.0;
    double speed = 0.0;
    double yaw = 0.0;
    double cooperation = 0.0;
    double total = 0.0;
};

struct AttackReward {
    double speed = 0.0;
    double distance = 0.0;
    double lane = 0.0;
    double obstacle = 0.0;
    double impulse = 0.0;
    double total = 0.0;
};

// -a1*1{collision} - a2*|v - v_bar| - a3*|theta + 90| - a4*(v_max - v_min).
// The yaw term uses the wrapped angular distance to -90 degrees.
DriveReward drive_reward(const StepSummary& summary, const RewardCoeffs& coeffs,
                         double v_bar);

// -a5*mean|v_adv - v_bar| - a6*d - a7*mean|omega_adv|
// + a8*sum(f) + a8*(1 - d/5)*1{d < d_min_hist} - a9*J_max, with d the step's
// minimum gap. The bonus indicator tests the pre-update d_min_hist; the
// history is then advanced to min(d_min_hist, d).
AttackReward attack_reward(const StepSummary& summary, AttackHistory& history,
                           const RewardCoeffs& coeffs, double v_bar);

} // namespace nearmiss
