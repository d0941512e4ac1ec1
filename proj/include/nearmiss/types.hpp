#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nearmiss {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double d) { return d * (kPi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / kPi); }

// Wraps a heading in degrees into (-180, 180]. Throws on non-finite input.
double wrap_angle(double theta_deg);

// Per-vehicle kinematic state. Headings use degrees with straight travel
// along the road at theta = -90 (increasing travel decreases y).
struct VehicleState {
    double x = 0.0;       // lateral position (m)
    double y = 0.0;       // longitudinal position (m)
    double v = 0.0;       // speed (m/s), never negative
    double theta = -90.0; // heading (deg) in (-180, 180]
    double accel = 0.0;   // realized longitudinal acceleration (m/s^2)
    double omega = 0.0;   // realized yaw rate (deg/s)
};

// Two-component control; both entries hard-clamped to [-1, 1] on construction.
struct Action {
    double p = 0.0;
    double delta = 0.0;

    Action() = default;
    Action(double p_, double delta_)
        : p(std::clamp(p_, -1.0, 1.0)), delta(std::clamp(delta_, -1.0, 1.0)) {}
};

struct VehicleDims {
    double length = 4.5; // m
    double width = 2.0;  // m
    double mass = 1500.0; // kg
    double l_f = 1.4;    // front axle to center (m)
    double l_r = 1.4;    // rear axle to center (m)
};

struct RoadGeometry {
    int n_lanes = 3;
    double lane_width = 3.5; // m
    double length = 600.0;   // m, travelled in the -y direction starting near 0

    double width() const { return n_lanes * lane_width; }
    double center_x() const { return 0.5 * width(); }
    double lane_center(int lane) const { return (lane + 0.5) * lane_width; }
    int lane_of(double x) const {
        int lane = static_cast<int>(std::floor(x / lane_width));
        return std::clamp(lane, 0, n_lanes - 1);
    }
};

struct SceneVehicle {
    int id = 0;
    VehicleState state;
    VehicleDims dims;
};

// Synchronized snapshot of all vehicles. Index 0 is the AV.
struct Scene {
    double t = 0.0;
    std::vector<SceneVehicle> vehicles;
    RoadGeometry road;

    const SceneVehicle& av() const { return vehicles.at(0); }
    const SceneVehicle* find(int id) const {
        for (const auto& v : vehicles)
            if (v.id == id) return &v;
        return nullptr;
    }
    int index_of(int id) const {
        for (std::size_t i = 0; i < vehicles.size(); ++i)
            if (vehicles[i].id == id) return static_cast<int>(i);
        return -1;
    }
};

using ObservationVector = std::vector<double>;

enum class AgentRole { AV, BV };

inline const char* role_name(AgentRole r) { return r == AgentRole::AV ? "AV" : "BV"; }

enum class TerminationReason { none, collision, off_road, road_end, horizon };

const char* termination_name(TerminationReason r);
TerminationReason termination_from_name(const std::string& s);

} // namespace nearmiss
