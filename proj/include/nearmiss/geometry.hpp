#pragma once

#include <array>
#include <vector>

#include "nearmiss/types.hpp"

namespace nearmiss {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Oriented rectangle: center, heading of the long axis (degrees), half extents.
struct ObbPose {
    double cx = 0.0;
    double cy = 0.0;
    double heading_deg = 0.0;
    double half_length = 1.0;
    double half_width = 1.0;

    std::array<Vec2, 4> corners() const;
    Vec2 axis_long() const;  // unit vector along the length axis
    Vec2 axis_lat() const;   // unit vector along the width axis
};

ObbPose obb_of(const VehicleState& state, const VehicleDims& dims);

// Separating-axis test over the 4 face normals.
bool obb_overlap(const ObbPose& a, const ObbPose& b);

// Minimum Euclidean distance between the two rectangle boundaries/interiors.
// Exactly 0 when obb_overlap(a, b) is true.
double boundary_gap(const ObbPose& a, const ObbPose& b);

// Exact distance from a point to a rectangle (0 inside).
double point_obb_distance(Vec2 p, const ObbPose& box);

double segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

struct OcclusionParams {
    double range = 30.0;          // m
    double half_angle_deg = 15.0; // forward view sector half-angle
};

struct ImpulseParams {
    double restitution = 0.2; // e in [0, 1]
};

// Two-body normal collision impulse J = (1+e) * m_red * max(0, closing speed
// along the center-to-center normal). Symmetric under swapping the vehicles.
// Throws on coincident centers.
double collision_impulse(const VehicleState& av, const VehicleDims& av_dims,
                         const VehicleState& bv, const VehicleDims& bv_dims,
                         const ImpulseParams& params);

// True iff the BV rectangle intersects the AV's forward view sector (apex at
// the AV center, bisector along the AV heading). Tested as: any BV corner
// inside the sector, or either sector edge ray hits the rectangle, or the
// bisector ray hits it.
bool occludes(const VehicleState& av, const VehicleDims& av_dims,
              const VehicleState& bv, const VehicleDims& bv_dims,
              const OcclusionParams& params);

struct CollisionEvent {
    int a = 0; // vehicle ids; a is the lower-index vehicle of the pair
    int b = 0;
    double impulse = 0.0; // kg*m/s, 0 for BV-BV pairs
};

// Per-frame quantities consumed by the reward functions. d_min_current is the
// minimum AV-BV boundary gap; occluding_bv_ids lists BVs inside the AV's view
// sector. BV-BV overlaps are recorded with zero impulse.
struct GeometrySummary {
    int av_id = 0;
    std::vector<CollisionEvent> collisions;
    double d_min_current = 0.0;
    std::vector<int> occluding_bv_ids;

    bool involves(const CollisionEvent& c, int id) const { return c.a == id || c.b == id; }
    bool av_collided() const {
        for (const auto& c : collisions)
            if (involves(c, av_id)) return true;
        return false;
    }
    bool vehicle_collided(int id) const {
        for (const auto& c : collisions)
            if (involves(c, id)) return true;
        return false;
    }
    double av_j_max() const {
        double j = 0.0;
        for (const auto& c : collisions)
            if (involves(c, av_id) && c.impulse > j) j = c.impulse;
        return j;
    }
};

GeometrySummary scene_geometry_summary(const Scene& scene,
                                       const OcclusionParams& occl,
                                       const ImpulseParams& imp);

} // namespace nearmiss
