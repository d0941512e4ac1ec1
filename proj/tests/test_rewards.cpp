#include <doctest.h>

#include "nearmiss/rewards.hpp"
#include "nearmiss/rng.hpp"

using namespace nearmiss;

namespace {

const RewardCoeffs kPaperCoeffs; // [40, 0.5, 1.2, 0.5, 0.4, 1.5, 3, 10, 0.01]
constexpr double kVBar = 8.0;

StepSummary drive_case(bool collided, double v, double theta, double v_max, double v_min) {
    StepSummary s;
    s.collided = collided;
    s.ego_speed = v;
    s.ego_theta = theta;
    s.v_max = v_max;
    s.v_min = v_min;
    return s;
}

StepSummary attack_case(std::vector<double> bv_speeds, double d, std::vector<double> omegas,
                        std::map<int, int> occl, double j_max) {
    StepSummary s;
    s.bv_speeds = std::move(bv_speeds);
    s.d_min_current = d;
    s.bv_abs_omega = std::move(omegas);
    s.occl_frames = std::move(occl);
    s.j_max_step = j_max;
    return s;
}

} // namespace

TEST_SUITE("drive_reward") {
    TEST_CASE("all terms at target give zero") {
        const DriveReward r = drive_reward(drive_case(false, 8, -90, 8, 8), kPaperCoeffs, kVBar);
        CHECK(r.total == 0.0);
    }

    TEST_CASE("collision alone costs alpha1") {
        const DriveReward r = drive_reward(drive_case(true, 8, -90, 8, 8), kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(-40.0).epsilon(1e-13));
        CHECK(r.collision == -40.0);
    }

    TEST_CASE("mixed deviation case from the paper coefficients") {
        // 0.5*2 + 1.2*3 + 0.5*4 = 6.6
        const DriveReward r =
            drive_reward(drive_case(false, 10, -87, 10, 6), kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(-6.6).epsilon(1e-13));
        CHECK(r.speed == doctest::Approx(-1.0).epsilon(1e-13));
        CHECK(r.yaw == doctest::Approx(-3.6).epsilon(1e-13));
        CHECK(r.cooperation == doctest::Approx(-2.0).epsilon(1e-13));
    }

    TEST_CASE("slow driving") {
        const DriveReward r = drive_reward(drive_case(false, 5, -90, 8, 8), kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(-1.5).epsilon(1e-13));
    }

    TEST_CASE("yaw uses the wrapped angular distance") {
        // heading 180: the shortest arc to -90 is 90 degrees, not 270
        const DriveReward r =
            drive_reward(drive_case(false, 8, 180, 8, 8), kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(-108.0).epsilon(1e-12));
    }

    TEST_CASE("all four terms active") {
        // -40 - 0.5*1.5 - 1.2*5 - 0.5*2 = -47.75
        const DriveReward r =
            drive_reward(drive_case(true, 6.5, -95, 9, 7), kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(-47.75).epsilon(1e-12));
    }

    TEST_CASE("never positive, zero only at target") {
        RngStream rng(51);
        for (int i = 0; i < 100000; ++i) {
            const StepSummary s = drive_case(rng.uniform01() < 0.3, rng.uniform(0, 20),
                                             rng.uniform(-180, 180), 0, 0);
            StepSummary with_spread = s;
            with_spread.v_max = s.ego_speed + rng.uniform(0, 5);
            with_spread.v_min = s.ego_speed - rng.uniform(0, 5);
            const DriveReward r = drive_reward(with_spread, kPaperCoeffs, kVBar);
            CHECK(r.total <= 0.0);
            CHECK(r.total ==
                  doctest::Approx(r.collision + r.speed + r.yaw + r.cooperation)
                      .epsilon(1e-12));
        }
    }
}

TEST_SUITE("attack_reward") {
    TEST_CASE("all-zero summary with exhausted history gives zero") {
        AttackHistory h;
        h.d_min_hist = 0.0;
        const AttackReward r =
            attack_reward(attack_case({}, 0.0, {}, {}, 0.0), h, kPaperCoeffs, kVBar);
        CHECK(r.total == 0.0);
        CHECK(h.d_min_hist == 0.0);
    }

    TEST_CASE("occlusion, new-minimum bonus and deviations combine") {
        // 10*3 + 10*(1 - 2/5) - 0.4*1 - 1.5*2 - 3*0.5 = 31.1
        AttackHistory h;
        h.d_min_hist = 2.5;
        const AttackReward r = attack_reward(
            attack_case({9.0, 9.0}, 2.0, {0.5, 0.5}, {{1, 2}, {2, 1}}, 0.0), h,
            kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(31.1).epsilon(1e-12));
        CHECK(h.d_min_hist == 2.0); // advanced after the bonus was evaluated
    }

    TEST_CASE("impulse term for a lone 9000 collision") {
        AttackHistory h;
        h.d_min_hist = 0.0;
        const AttackReward r =
            attack_reward(attack_case({8.0}, 0.0, {0.0}, {}, 9000.0), h, kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(-90.0).epsilon(1e-12));
        CHECK(r.impulse == doctest::Approx(-90.0).epsilon(1e-12));
    }

    TEST_CASE("pure occlusion minus the gap cost") {
        // 10*5 - 1.5*3 = 45.5, history not improved (3 >= 2)
        AttackHistory h;
        h.d_min_hist = 2.0;
        const AttackReward r =
            attack_reward(attack_case({8.0}, 3.0, {0.0}, {{1, 5}}, 0.0), h, kPaperCoeffs,
                          kVBar);
        CHECK(r.total == doctest::Approx(45.5).epsilon(1e-12));
        CHECK(h.d_min_hist == 2.0);
    }

    TEST_CASE("new-minimum bonus alone") {
        // 10*(1 - 1/5) - 1.5*1 = 6.5
        AttackHistory h;
        h.d_min_hist = 4.0;
        const AttackReward r =
            attack_reward(attack_case({8.0}, 1.0, {0.0}, {}, 0.0), h, kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(6.5).epsilon(1e-12));
        CHECK(h.d_min_hist == 1.0);
    }

    TEST_CASE("all five terms active") {
        // 10*1 + 10*(1-4/5) - 0.4*2 - 1.5*4 - 3*2 - 0.01*100 = -1.8
        AttackHistory h;
        h.d_min_hist = 5.0;
        const AttackReward r = attack_reward(
            attack_case({6.0, 10.0}, 4.0, {1.0, 3.0}, {{1, 1}}, 100.0), h, kPaperCoeffs,
            kVBar);
        CHECK(r.total == doctest::Approx(-1.8).epsilon(1e-12));
    }

    TEST_CASE("bonus at exactly d = 5 is zero") {
        AttackHistory h;
        h.d_min_hist = 6.0;
        const AttackReward r =
            attack_reward(attack_case({8.0}, 5.0, {0.0}, {}, 0.0), h, kPaperCoeffs, kVBar);
        CHECK(r.total == doctest::Approx(-7.5).epsilon(1e-12));
    }

    TEST_CASE("history is non-increasing across a call sequence") {
        RngStream rng(53);
        AttackHistory h;
        double prev = h.d_min_hist;
        for (int i = 0; i < 1000; ++i) {
            attack_reward(attack_case({8.0}, rng.uniform(0, 30), {0.0}, {}, 0.0), h,
                          kPaperCoeffs, kVBar);
            CHECK(h.d_min_hist <= prev);
            prev = h.d_min_hist;
        }
    }

    TEST_CASE("components sum to total on random summaries") {
        RngStream rng(59);
        for (int i = 0; i < 100000; ++i) {
            AttackHistory h;
            h.d_min_hist = rng.uniform(0, 20);
            const AttackReward r = attack_reward(
                attack_case({rng.uniform(0, 20), rng.uniform(0, 20)}, rng.uniform(0, 20),
                            {rng.uniform(0, 30), rng.uniform(0, 30)},
                            {{1, static_cast<int>(rng.uniform_int(6))}},
                            rng.uniform(0, 20000)),
                h, kPaperCoeffs, kVBar);
            CHECK(r.total ==
                  doctest::Approx(r.speed + r.distance + r.lane + r.obstacle + r.impulse)
                      .epsilon(1e-12));
        }
    }

    TEST_CASE("monotone in the impulse and occlusion arguments") {
        auto total_at = [&](double j, int f) {
            AttackHistory h;
            h.d_min_hist = 1.0;
            return attack_reward(attack_case({8.0}, 2.0, {0.0}, {{1, f}}, j), h,
                                 kPaperCoeffs, kVBar)
                .total;
        };
        CHECK(total_at(100.0, 2) > total_at(200.0, 2));
        CHECK(total_at(1000.0, 2) > total_at(5000.0, 2));
        CHECK(total_at(100.0, 3) > total_at(100.0, 2));
        CHECK(total_at(100.0, 5) > total_at(100.0, 4));
    }

    TEST_CASE("without occlusion or bonus the reward is non-positive") {
        RngStream rng(61);
        for (int i = 0; i < 10000; ++i) {
            AttackHistory h;
            h.d_min_hist = 0.0; // bonus can never fire
            const AttackReward r = attack_reward(
                attack_case({rng.uniform(0, 20)}, rng.uniform(0, 20),
                            {rng.uniform(0, 30)}, {}, rng.uniform(0, 10000)),
                h, kPaperCoeffs, kVBar);
            CHECK(r.total <= 0.0);
        }
    }
}
