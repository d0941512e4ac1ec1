#include <doctest.h>

#include "nearmiss/geometry.hpp"
#include "nearmiss/rng.hpp"
#include "oracles.hpp"

using namespace nearmiss;

namespace {

VehicleState state_at(double x, double y, double v, double theta) {
    VehicleState s;
    s.x = x;
    s.y = y;
    s.v = v;
    s.theta = theta;
    return s;
}

} // namespace

TEST_SUITE("obb_overlap") {
    TEST_CASE("identical poses overlap") {
        ObbPose a{1.0, 2.0, 30.0, 2.25, 1.0};
        CHECK(obb_overlap(a, a));
    }

    TEST_CASE("far apart poses are disjoint") {
        ObbPose a{0.0, 0.0, 0.0, 2.25, 1.0};
        ObbPose b{100.0, 0.0, 45.0, 2.25, 1.0};
        CHECK(!obb_overlap(a, b));
    }

    TEST_CASE("rotated pair matches the containment oracle") {
        // a at origin theta=0, b at (4, 0) rotated 45 degrees: b's near corner
        // reaches x = 4 - 3.25/sqrt(2) = 1.70 < 2.25, inside a
        ObbPose a{0.0, 0.0, 0.0, 2.25, 1.0};
        ObbPose b{4.0, 0.0, 45.0, 2.25, 1.0};
        RngStream rng(7);
        bool oracle_hit = false;
        for (int i = 0; i < 1000000 && !oracle_hit; ++i) {
            const double lx = rng.uniform(-b.half_length, b.half_length);
            const double ly = rng.uniform(-b.half_width, b.half_width);
            double x, y;
            oracles::Frame(b).to_world(lx, ly, x, y);
            oracle_hit = oracles::point_in_box(a, x, y);
        }
        CHECK(oracle_hit);
        CHECK(obb_overlap(a, b));
        CHECK(obb_overlap(b, a));
    }

    TEST_CASE("agrees with the sampling oracle on random pairs") {
        RngStream rng(11);
        int compared = 0;
        for (int trial = 0; trial < 10000; ++trial) {
            const ObbPose a = oracles::random_pose(rng);
            const ObbPose b = oracles::random_pose(rng);
            const int verdict = oracles::overlap_oracle(a, b, 1e-9, 96);
            if (verdict == 0) continue; // grazing contact excluded
            ++compared;
            CHECK(obb_overlap(a, b) == (verdict > 0));
            CHECK(obb_overlap(b, a) == (verdict > 0));
        }
        CHECK(compared > 9000);
    }
}

TEST_SUITE("boundary_gap") {
    TEST_CASE("overlap means zero gap") {
        ObbPose a{0.0, 0.0, 10.0, 2.25, 1.0};
        ObbPose b{0.5, 0.3, -40.0, 2.25, 1.0};
        REQUIRE(obb_overlap(a, b));
        CHECK(boundary_gap(a, b) == 0.0);
    }

    TEST_CASE("parallel facing edges") {
        // axis-aligned, edge-to-edge spacing of 3 m
        ObbPose a{0.0, 0.0, 0.0, 2.0, 1.0};
        ObbPose b{7.0, 0.0, 0.0, 2.0, 1.0};
        CHECK(boundary_gap(a, b) == doctest::Approx(3.0).epsilon(1e-12));
    }

    TEST_CASE("matches the perimeter-sampling oracle on random pairs") {
        RngStream rng(13);
        int checked = 0;
        while (checked < 300) {
            const ObbPose a = oracles::random_pose(rng);
            const ObbPose b = oracles::random_pose(rng);
            if (obb_overlap(a, b)) continue;
            const double expect = oracles::gap_oracle(a, b, 2500);
            CHECK(boundary_gap(a, b) == doctest::Approx(expect).epsilon(1e-6));
            ++checked;
        }
    }

    TEST_CASE("symmetry and the zero-gap equivalence") {
        RngStream rng(17);
        for (int trial = 0; trial < 2000; ++trial) {
            const ObbPose a = oracles::random_pose(rng);
            const ObbPose b = oracles::random_pose(rng);
            const double g1 = boundary_gap(a, b);
            const double g2 = boundary_gap(b, a);
            CHECK(g1 == g2);
            CHECK((g1 == 0.0) == obb_overlap(a, b));
        }
    }
}

TEST_SUITE("collision_impulse") {
    const VehicleDims dims; // 1500 kg

    TEST_CASE("head-on closing at 10 m/s gives 9000") {
        // AV at origin driving +x at 10, BV 4 m ahead at rest, e = 0.2
        const VehicleState av = state_at(0, 0, 10, 0);
        const VehicleState bv = state_at(4, 0, 0, 0);
        const double j = collision_impulse(av, dims, bv, dims, ImpulseParams{0.2});
        CHECK(j == doctest::Approx(9000.0).epsilon(1e-12));
    }

    TEST_CASE("separating velocities give zero") {
        const VehicleState av = state_at(0, 0, 5, 180); // driving away
        const VehicleState bv = state_at(4, 0, 0, 0);
        CHECK(collision_impulse(av, dims, bv, dims, ImpulseParams{0.2}) == 0.0);
    }

    TEST_CASE("e=0 closing at 1 m/s gives 750") {
        const VehicleState av = state_at(0, 0, 1, 0);
        const VehicleState bv = state_at(3, 0, 0, 0);
        CHECK(collision_impulse(av, dims, bv, dims, ImpulseParams{0.0}) ==
              doctest::Approx(750.0).epsilon(1e-12));
    }

    TEST_CASE("swapping the vehicles is symmetric") {
        RngStream rng(19);
        for (int i = 0; i < 1000; ++i) {
            const VehicleState a = state_at(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                            rng.uniform(0, 20), rng.uniform(-180, 180));
            VehicleState b = state_at(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                      rng.uniform(0, 20), rng.uniform(-180, 180));
            if (a.x == b.x && a.y == b.y) b.x += 1.0;
            const ImpulseParams p{rng.uniform(0.0, 1.0)};
            const double j1 = collision_impulse(a, dims, b, dims, p);
            const double j2 = collision_impulse(b, dims, a, dims, p);
            CHECK(j1 == doctest::Approx(j2).epsilon(1e-12));
        }
    }

    TEST_CASE("Galilean invariance") {
        RngStream rng(23);
        const double deg = kPi / 180.0;
        for (int i = 0; i < 1000; ++i) {
            const VehicleState a = state_at(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                            rng.uniform(0, 20), rng.uniform(-180, 180));
            VehicleState b = state_at(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                      rng.uniform(0, 20), rng.uniform(-180, 180));
            if (a.x == b.x && a.y == b.y) b.x += 1.0;
            const double wx = rng.uniform(-15, 15), wy = rng.uniform(-15, 15);
            auto boosted = [&](const VehicleState& s) {
                const double vx = s.v * std::cos(s.theta * deg) + wx;
                const double vy = s.v * std::sin(s.theta * deg) + wy;
                VehicleState out = s;
                out.v = std::hypot(vx, vy);
                out.theta = rad2deg(std::atan2(vy, vx));
                return out;
            };
            const ImpulseParams p{0.2};
            const double j0 = collision_impulse(a, dims, b, dims, p);
            const double j1 = collision_impulse(boosted(a), dims, boosted(b), dims, p);
            CHECK(j1 == doctest::Approx(j0).epsilon(1e-9));
        }
    }

    TEST_CASE("coincident centers are rejected") {
        const VehicleState a = state_at(1, 1, 5, 0);
        CHECK_THROWS_AS(collision_impulse(a, dims, a, dims, ImpulseParams{}),
                        std::domain_error);
    }
}

TEST_SUITE("occludes") {
    const VehicleDims dims;
    const OcclusionParams params; // 30 m, 15 degrees

    TEST_CASE("vehicle straight ahead occludes") {
        const VehicleState av = state_at(0, 0, 8, -90);
        const VehicleState bv = state_at(0, -10, 8, -90);
        CHECK(occludes(av, dims, bv, dims, params));
        CHECK(oracles::occlusion_oracle(av, bv, dims, params));
    }

    TEST_CASE("vehicle behind does not occlude") {
        const VehicleState av = state_at(0, 0, 8, -90);
        const VehicleState bv = state_at(0, 10, 8, -90);
        CHECK(!occludes(av, dims, bv, dims, params));
    }

    TEST_CASE("45 degrees off the bisector is outside the sector") {
        const VehicleState av = state_at(0, 0, 8, -90);
        const VehicleState bv = state_at(20, -20, 8, -90);
        CHECK(!occludes(av, dims, bv, dims, params));
        CHECK(!oracles::occlusion_oracle(av, bv, dims, params));
    }

    TEST_CASE("agrees with the ray-fan oracle on random configurations") {
        RngStream rng(29);
        int compared = 0;
        for (int trial = 0; trial < 3000; ++trial) {
            const VehicleState av =
                state_at(rng.uniform(-5, 5), rng.uniform(-5, 5), 8, rng.uniform(-180, 180));
            const VehicleState bv =
                state_at(rng.uniform(-40, 40), rng.uniform(-40, 40), 8,
                         rng.uniform(-180, 180));
            const ObbPose box = obb_of(bv, dims);
            const bool hit_lo = oracles::occlusion_oracle_box(
                av, oracles::inflate(box, -1e-6), params);
            const bool hit_hi = oracles::occlusion_oracle_box(
                av, oracles::inflate(box, 1e-6), params);
            if (hit_lo != hit_hi) continue; // boundary band excluded
            ++compared;
            CHECK(occludes(av, dims, bv, dims, params) == hit_hi);
        }
        CHECK(compared > 2500);
    }
}

TEST_SUITE("scene_geometry_summary") {
    Scene make_scene(std::initializer_list<VehicleState> states) {
        Scene s;
        int id = 0;
        for (const auto& st : states) {
            SceneVehicle v;
            v.id = id++;
            v.state = st;
            s.vehicles.push_back(v);
        }
        return s;
    }

    TEST_CASE("empty surroundings") {
        const Scene s = make_scene({state_at(5, 0, 8, -90), state_at(5, -200, 8, -90),
                                    state_at(5, -300, 8, -90)});
        const auto sum = scene_geometry_summary(s, OcclusionParams{}, ImpulseParams{});
        CHECK(sum.collisions.empty());
        CHECK(sum.occluding_bv_ids.empty());
        CHECK(!sum.av_collided());
        CHECK(sum.av_j_max() == 0.0);
    }

    TEST_CASE("one overlapping BV with closing speed") {
        const Scene s = make_scene({state_at(0, 0, 10, -90), state_at(0, -3, 0, -90)});
        const auto sum = scene_geometry_summary(s, OcclusionParams{}, ImpulseParams{0.2});
        REQUIRE(sum.collisions.size() == 1);
        CHECK(sum.collisions[0].a == 0);
        CHECK(sum.collisions[0].b == 1);
        // closing speed 10 along the center line, reduced mass 750, e = 0.2
        CHECK(sum.collisions[0].impulse == doctest::Approx(9000.0).epsilon(1e-12));
        CHECK(sum.d_min_current == 0.0);
        CHECK(sum.av_collided());
    }

    TEST_CASE("minimum gap over three BVs") {
        // bumper gaps of 2, 5 and 9 m straight ahead (length 4.5)
        const Scene s = make_scene({state_at(0, 0, 8, -90), state_at(0, -6.5, 8, -90),
                                    state_at(0, -14.0, 8, -90), state_at(0, -22.5, 8, -90)});
        const auto sum = scene_geometry_summary(s, OcclusionParams{}, ImpulseParams{});
        CHECK(sum.d_min_current == doctest::Approx(2.0).epsilon(1e-9));
    }

    TEST_CASE("BV-BV contact carries no impulse") {
        const Scene s = make_scene({state_at(10, -50, 8, -90), state_at(0, 0, 10, -90),
                                    state_at(0, -3, 0, -90)});
        const auto sum = scene_geometry_summary(s, OcclusionParams{}, ImpulseParams{0.2});
        REQUIRE(sum.collisions.size() == 1);
        CHECK(sum.collisions[0].impulse == 0.0);
        CHECK(!sum.av_collided());
        CHECK(sum.av_j_max() == 0.0);
        CHECK(sum.vehicle_collided(1));
        CHECK(sum.vehicle_collided(2));
    }
}

TEST_SUITE("rotation invariance") {
    TEST_CASE("all four operations are invariant under a scene rotation") {
        RngStream rng(31);
        const VehicleDims dims;
        for (int trial = 0; trial < 300; ++trial) {
            const double ang = rng.uniform(-180.0, 180.0);
            const double c = std::cos(deg2rad(ang)), s = std::sin(deg2rad(ang));
            auto rotate = [&](const VehicleState& st) {
                VehicleState out = st;
                out.x = st.x * c - st.y * s;
                out.y = st.x * s + st.y * c;
                out.theta = wrap_angle(st.theta + ang);
                return out;
            };
            const VehicleState a = state_at(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                            rng.uniform(0, 15), rng.uniform(-180, 180));
            const VehicleState b = state_at(rng.uniform(-20, 20), rng.uniform(-20, 20),
                                            rng.uniform(0, 15), rng.uniform(-180, 180));
            const ObbPose pa = obb_of(a, dims), pb = obb_of(b, dims);
            const ObbPose ra = obb_of(rotate(a), dims), rb = obb_of(rotate(b), dims);

            CHECK(obb_overlap(pa, pb) == obb_overlap(ra, rb));
            CHECK(boundary_gap(ra, rb) ==
                  doctest::Approx(boundary_gap(pa, pb)).epsilon(1e-9).scale(1.0));
            if (a.x != b.x || a.y != b.y) {
                const ImpulseParams ip{0.3};
                CHECK(collision_impulse(rotate(a), dims, rotate(b), dims, ip) ==
                      doctest::Approx(collision_impulse(a, dims, b, dims, ip))
                          .epsilon(1e-9));
            }
            CHECK(occludes(a, dims, b, dims, OcclusionParams{}) ==
                  occludes(rotate(a), dims, rotate(b), dims, OcclusionParams{}));
        }
    }
}
