#include <doctest.h>

#include "nearmiss/autopilot.hpp"
#include "nearmiss/dynamics.hpp"
#include "nearmiss/geometry.hpp"

using namespace nearmiss;

namespace {

Scene platoon(const ExperimentConfig& cfg, const std::vector<double>& ys, double lane_x,
              double v) {
    Scene s;
    s.road = cfg.road;
    int id = 0;
    for (double y : ys) {
        SceneVehicle veh;
        veh.id = id++;
        veh.dims = cfg.dims;
        veh.state.x = lane_x;
        veh.state.y = y;
        veh.state.v = v;
        veh.state.theta = -90.0;
        s.vehicles.push_back(veh);
    }
    return s;
}

} // namespace

TEST_SUITE("idm_accel") {
    const IdmParams params;      // v0 = 8, T = 1.5, a = 2, b = 3, s0 = 2
    const ControlLimits limits;  // a_max 3, b_max 8

    TEST_CASE("free flow at the desired speed is exactly zero") {
        CHECK(idm_accel(8.0, std::numeric_limits<double>::infinity(), 8.0, params, limits) ==
              0.0);
    }

    TEST_CASE("standstill on a free road accelerates at a_idm") {
        CHECK(idm_accel(0.0, std::numeric_limits<double>::infinity(), 0.0, params, limits) ==
              doctest::Approx(2.0).epsilon(1e-15));
    }

    TEST_CASE("closing fast on a stopped leader brakes hard") {
        // v=10, gap=5, lead_v=0: s* = 2 + 15 + 10*10/(2*sqrt(6)) = 37.41,
        // a = 2*(1 - (10/8)^4 - (37.41/5)^2) << -b_max, so clamped to -8
        const double a = idm_accel(10.0, 5.0, 0.0, params, limits);
        CHECK(a == -8.0);
        const double s_star = 2.0 + 10.0 * 1.5 + 10.0 * 10.0 / (2.0 * std::sqrt(6.0));
        const double raw = 2.0 * (1.0 - std::pow(10.0 / 8.0, 4) - std::pow(s_star / 5.0, 2));
        CHECK(raw < -8.0);
    }

    TEST_CASE("non-positive gap is an emergency stop") {
        CHECK(idm_accel(5.0, 0.0, 3.0, params, limits) == -8.0);
        CHECK(idm_accel(5.0, -1.0, 3.0, params, limits) == -8.0);
    }

    TEST_CASE("output respects the clamp range") {
        for (double v : {0.0, 4.0, 8.0, 16.0, 30.0})
            for (double gap : {0.5, 2.0, 10.0, 100.0})
                for (double lv : {0.0, 8.0, 20.0}) {
                    const double a = idm_accel(v, gap, lv, params, limits);
                    CHECK(a >= -8.0);
                    CHECK(a <= 3.0);
                }
    }
}

TEST_SUITE("autopilot_action") {
    TEST_CASE("equilibrium: centered, at speed, free road") {
        ExperimentConfig cfg;
        const Scene s = platoon(cfg, {-20.0}, cfg.road.lane_center(1), cfg.idm.v0);
        const Action a = autopilot_action(s, 0, cfg.idm, cfg.sim.limits);
        CHECK(std::abs(a.p) < 1e-9);
        CHECK(std::abs(a.delta) < 1e-9);
    }

    TEST_CASE("offset to the left steers right") {
        ExperimentConfig cfg;
        Scene s = platoon(cfg, {-20.0}, cfg.road.lane_center(1), cfg.idm.v0);
        // facing -y, +x is the driver's left; positive delta also steers left
        s.vehicles[0].state.x += 0.5;
        const Action a = autopilot_action(s, 0, cfg.idm, cfg.sim.limits);
        CHECK(a.delta < 0.0);
        CHECK(a.delta == doctest::Approx(-0.4 * 0.5).epsilon(1e-12));
    }

    TEST_CASE("stopped leader close ahead saturates the brake") {
        ExperimentConfig cfg;
        // bumper gap 4 m: centers 8.5 m apart with 4.5 m long cars
        Scene s = platoon(cfg, {-20.0, -28.5}, cfg.road.lane_center(0), cfg.idm.v0);
        s.vehicles[1].state.v = 0.0;
        const Action a = autopilot_action(s, 0, cfg.idm, cfg.sim.limits);
        CHECK(a.p == -1.0);
    }

    TEST_CASE("deterministic and stateless") {
        ExperimentConfig cfg;
        const Scene s = platoon(cfg, {-20.0, -50.0}, cfg.road.lane_center(2), 7.0);
        const Action a = autopilot_action(s, 0, cfg.idm, cfg.sim.limits);
        const Action b = autopilot_action(s, 0, cfg.idm, cfg.sim.limits);
        CHECK(a.p == b.p);
        CHECK(a.delta == b.delta);
    }

    TEST_CASE("unknown vehicle id is rejected") {
        ExperimentConfig cfg;
        const Scene s = platoon(cfg, {-20.0}, cfg.road.lane_center(1), 8.0);
        CHECK_THROWS_AS(autopilot_action(s, 42, cfg.idm, cfg.sim.limits),
                        std::out_of_range);
    }

    TEST_CASE("a spaced platoon drives 60 seconds without collisions") {
        ExperimentConfig cfg;
        cfg.road.length = 1200.0;
        // three vehicles per lane, 30 m headways, all at v0
        std::vector<double> ys;
        Scene s;
        s.road = cfg.road;
        int id = 0;
        for (int lane = 0; lane < 3; ++lane)
            for (int k = 0; k < 3; ++k) {
                SceneVehicle veh;
                veh.id = id++;
                veh.dims = cfg.dims;
                veh.state.x = cfg.road.lane_center(lane);
                veh.state.y = -20.0 - 30.0 * k;
                veh.state.v = cfg.idm.v0;
                veh.state.theta = -90.0;
                s.vehicles.push_back(veh);
            }
        const int steps = static_cast<int>(60.0 / cfg.dt_control());
        double max_lateral_error = 0.0;
        for (int step = 0; step < steps; ++step) {
            std::vector<Action> actions;
            actions.reserve(s.vehicles.size());
            for (const auto& veh : s.vehicles)
                actions.push_back(autopilot_action(s, veh.id, cfg.idm, cfg.sim.limits));
            const auto subs = step_scene(s, actions, cfg.sim);
            for (const auto& sub : subs) CHECK(sub.geometry.collisions.empty());
            s = subs.back().scene;
            for (const auto& veh : s.vehicles) {
                const int lane = cfg.road.lane_of(veh.state.x);
                max_lateral_error = std::max(
                    max_lateral_error, std::abs(veh.state.x - cfg.road.lane_center(lane)));
            }
        }
        CHECK(max_lateral_error < 0.3);
    }
}
