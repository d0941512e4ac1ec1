#include "nearmiss/geometry.hpp"

#include <limits>

namespace nearmiss {

Vec2 ObbPose::axis_long() const {
    const double r = deg2rad(heading_deg);
    return {std::cos(r), std::sin(r)};
}

Vec2 ObbPose::axis_lat() const {
    const double r = deg2rad(heading_deg);
    return {-std::sin(r), std::cos(r)};
}

std::array<Vec2, 4> ObbPose::corners() const {
    const Vec2 u = axis_long();
    const Vec2 w = axis_lat();
    const Vec2 c{cx, cy};
    const Vec2 du = half_length * u;
    const Vec2 dw = half_width * w;
    return {c + du + dw, c + du - dw, c - du - dw, c - du + dw};
}

ObbPose obb_of(const VehicleState& state, const VehicleDims& dims) {
    return {state.x, state.y, state.theta, 0.5 * dims.length, 0.5 * dims.width};
}

namespace {

// projection radius of box b onto a unit axis
double projection_radius(const ObbPose& b, Vec2 axis) {
    return b.half_length * std::abs(dot(b.axis_long(), axis)) +
           b.half_width * std::abs(dot(b.axis_lat(), axis));
}

bool separated_on_axis(const ObbPose& a, const ObbPose& b, Vec2 axis) {
    const Vec2 d{b.cx - a.cx, b.cy - a.cy};
    return std::abs(dot(d, axis)) > projection_radius(a, axis) + projection_radius(b, axis);
}

} // namespace

bool obb_overlap(const ObbPose& a, const ObbPose& b) {
    if (separated_on_axis(a, b, a.axis_long())) return false;
    if (separated_on_axis(a, b, a.axis_lat())) return false;
    if (separated_on_axis(a, b, b.axis_long())) return false;
    if (separated_on_axis(a, b, b.axis_lat())) return false;
    return true;
}

double point_obb_distance(Vec2 p, const ObbPose& box) {
    const Vec2 d{p.x - box.cx, p.y - box.cy};
    const double lu = std::abs(dot(d, box.axis_long()));
    const double lw = std::abs(dot(d, box.axis_lat()));
    const double ex = std::max(lu - box.half_length, 0.0);
    const double ey = std::max(lw - box.half_width, 0.0);
    return std::hypot(ex, ey);
}

namespace {

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return norm(p - a);
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return norm(p - (a + t * ab));
}

double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    const Vec2 r = a1 - a0;
    const Vec2 s = b1 - b0;
    const double rxs = cross(r, s);
    const Vec2 qp = b0 - a0;
    if (rxs == 0.0) {
        if (cross(qp, r) != 0.0) return false; // parallel, non-collinear
        // collinear: check 1-D interval overlap along r
        const double rr = dot(r, r);
        if (rr == 0.0) return norm(qp) == 0.0;
        double t0 = dot(qp, r) / rr;
        double t1 = dot(b1 - a0, r) / rr;
        if (t0 > t1) std::swap(t0, t1);
        return t1 >= 0.0 && t0 <= 1.0;
    }
    const double t = cross(qp, s) / rxs;
    const double u = cross(qp, r) / rxs;
    return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

} // namespace

double segment_distance(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    if (segments_intersect(a0, a1, b0, b1)) return 0.0;
    double d = point_segment_distance(a0, b0, b1);
    d = std::min(d, point_segment_distance(a1, b0, b1));
    d = std::min(d, point_segment_distance(b0, a0, a1));
    d = std::min(d, point_segment_distance(b1, a0, a1));
    return d;
}

double boundary_gap(const ObbPose& a, const ObbPose& b) {
    if (obb_overlap(a, b)) return 0.0;
    const auto ca = a.corners();
    const auto cb = b.corners();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            best = std::min(best, segment_distance(ca[i], ca[(i + 1) % 4],
                                                   cb[j], cb[(j + 1) % 4]));
        }
    }
    return best;
}

double collision_impulse(const VehicleState& av, const VehicleDims& av_dims,
                         const VehicleState& bv, const VehicleDims& bv_dims,
                         const ImpulseParams& params) {
    const Vec2 n{bv.x - av.x, bv.y - av.y};
    const double len = norm(n);
    if (len == 0.0)
        throw std::domain_error("collision_impulse: coincident vehicle centers");
    const Vec2 nhat{n.x / len, n.y / len};
    const double ra = deg2rad(av.theta);
    const double rb = deg2rad(bv.theta);
    const Vec2 va{av.v * std::cos(ra), av.v * std::sin(ra)};
    const Vec2 vb{bv.v * std::cos(rb), bv.v * std::sin(rb)};
    const double closing = dot(va - vb, nhat);
    const double m_red = av_dims.mass * bv_dims.mass / (av_dims.mass + bv_dims.mass);
    return (1.0 + params.restitution) * m_red * std::max(0.0, closing);
}

namespace {

// segment from the sector apex, vs the rectangle
bool ray_hits_box(Vec2 apex, double angle_rad, double range, const ObbPose& box) {
    const Vec2 tip{apex.x + range * std::cos(angle_rad), apex.y + range * std::sin(angle_rad)};
    if (point_obb_distance(apex, box) == 0.0) return true;
    if (point_obb_distance(tip, box) == 0.0) return true;
    const auto c = box.corners();
    for (int i = 0; i < 4; ++i)
        if (segments_intersect(apex, tip, c[i], c[(i + 1) % 4])) return true;
    return false;
}

} // namespace

bool occludes(const VehicleState& av, const VehicleDims& av_dims,
              const VehicleState& bv, const VehicleDims& bv_dims,
              const OcclusionParams& params) {
    (void)av_dims;
    const Vec2 apex{av.x, av.y};
    const ObbPose box = obb_of(bv, bv_dims);

    for (const Vec2& corner : box.corners()) {
        const Vec2 d = corner - apex;
        const double r = norm(d);
        if (r > params.range) continue;
        if (r == 0.0) return true;
        const double bearing = rad2deg(std::atan2(d.y, d.x));
        if (std::abs(wrap_angle(bearing - av.theta)) <= params.half_angle_deg) return true;
    }
    const double h = deg2rad(av.theta);
    const double half = deg2rad(params.half_angle_deg);
    if (ray_hits_box(apex, h - half, params.range, box)) return true;
    if (ray_hits_box(apex, h + half, params.range, box)) return true;
    if (ray_hits_box(apex, h, params.range, box)) return true;
    return false;
}

GeometrySummary scene_geometry_summary(const Scene& scene,
                                       const OcclusionParams& occl,
                                       const ImpulseParams& imp) {
    GeometrySummary out;
    const auto& vs = scene.vehicles;
    if (vs.empty()) return out;
    out.av_id = vs[0].id;
    out.d_min_current = std::numeric_limits<double>::infinity();

    const ObbPose av_box = obb_of(vs[0].state, vs[0].dims);
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const ObbPose box_i = (i == 0) ? av_box : obb_of(vs[i].state, vs[i].dims);
        for (std::size_t j = i + 1; j < vs.size(); ++j) {
            const ObbPose box_j = obb_of(vs[j].state, vs[j].dims);
            if (!obb_overlap(box_i, box_j)) continue;
            CollisionEvent ev;
            ev.a = vs[i].id;
            ev.b = vs[j].id;
            // J_max is defined for AV-BV contact only; BV-BV pairs carry none
            ev.impulse = (i == 0) ? collision_impulse(vs[0].state, vs[0].dims,
                                                      vs[j].state, vs[j].dims, imp)
                                  : 0.0;
            out.collisions.push_back(ev);
        }
    }
    for (std::size_t j = 1; j < vs.size(); ++j) {
        const ObbPose box_j = obb_of(vs[j].state, vs[j].dims);
        out.d_min_current = std::min(out.d_min_current, boundary_gap(av_box, box_j));
        if (occludes(vs[0].state, vs[0].dims, vs[j].state, vs[j].dims, occl))
            out.occluding_bv_ids.push_back(vs[j].id);
    }
    return out;
}

} // namespace nearmiss
