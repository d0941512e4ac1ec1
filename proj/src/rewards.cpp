#include "nearmiss/rewards.hpp"

#include <limits>

namespace nearmiss {

namespace {

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

} // namespace

DriveReward drive_reward(const StepSummary& summary, const RewardCoeffs& coeffs,
                         double v_bar) {
    DriveReward r;
    r.collision = summary.collided ? -coeffs.alpha1 : 0.0;
    r.speed = -coeffs.alpha2 * std::abs(summary.ego_speed - v_bar);
    r.yaw = -coeffs.alpha3 * std::abs(wrap_angle(summary.ego_theta + 90.0));
    r.cooperation = -coeffs.alpha4 * (summary.v_max - summary.v_min);
    r.total = r.collision + r.speed + r.yaw + r.cooperation;
    return r;
}

AttackReward attack_reward(const StepSummary& summary, AttackHistory& history,
                           const RewardCoeffs& coeffs, double v_bar) {
    AttackReward r;
    std::vector<double> speed_dev;
    speed_dev.reserve(summary.bv_speeds.size());
    for (double v : summary.bv_speeds) speed_dev.push_back(std::abs(v - v_bar));
    r.speed = -coeffs.alpha5 * mean(speed_dev);

    const double d = summary.d_min_current;
    r.distance = -coeffs.alpha6 * d;
    r.lane = -coeffs.alpha7 * mean(summary.bv_abs_omega);

    int total_frames = 0;
    for (const auto& [id, f] : summary.occl_frames) total_frames += f;
    r.obstacle = coeffs.alpha8 * total_frames;
    if (d < history.d_min_hist) // pre-update history
        r.obstacle += coeffs.alpha8 * (1.0 - d / 5.0);
    history.d_min_hist = std::min(history.d_min_hist, d);

    r.impulse = -coeffs.alpha9 * summary.j_max_step;
    r.total = r.speed + r.distance + r.lane + r.obstacle + r.impulse;
    return r;
}

} // namespace nearmiss
