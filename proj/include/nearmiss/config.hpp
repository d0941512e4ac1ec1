#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nearmiss/dynamics.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

struct RewardCoeffs {
    double alpha1 = 40.0;  // collision indicator
    double alpha2 = 0.5;   // |v - v_bar|
    double alpha3 = 1.2;   // |theta + 90|
    double alpha4 = 0.5;   // v_max - v_min
    double alpha5 = 0.4;   // BV mean |v - v_bar|
    double alpha6 = 1.5;   // current minimum gap
    double alpha7 = 3.0;   // BV mean |omega|
    double alpha8 = 10.0;  // occlusion frames and new-minimum bonus
    double alpha9 = 0.01;  // max impulse

    std::vector<double> as_vector() const {
        return {alpha1, alpha2, alpha3, alpha4, alpha5, alpha6, alpha7, alpha8, alpha9};
    }
};

struct ObservationConfig {
    int k_obs = 4;            // neighbor slots
    double pos_scale = 50.0;  // m
    double v_scale = 20.0;    // m/s
    double omega_scale = 30.0; // deg/s
};

// Fixed pool of start layouts; lane/slot grids with jittered longitudinal
// offsets. Capacity = n_lanes * n_slots.
struct StartPoolConfig {
    int pool_size = 20;
    int n_slots = 4;
    double slot_spacing = 22.0; // m between consecutive slots
    double first_slot_y = -20.0;
    double jitter = 3.0; // max |longitudinal offset| per vehicle
};

struct IdmParams {
    double v0 = 8.0;    // desired speed (m/s)
    double T = 1.5;     // headway (s)
    double a_idm = 2.0; // max accel (m/s^2)
    double b_idm = 3.0; // comfortable decel (m/s^2)
    double s0 = 2.0;    // minimum gap (m)
    double k_p = 0.4;   // lane centering gain (per m)
    double k_d = 0.05;  // heading damping gain (per deg)
};

struct SacHyper {
    double gamma = 0.99;
    double tau = 0.005;
    double lr = 3e-4;
    int batch = 256;
    double alpha_ent = 0.2; // fixed entropy temperature
    int warmup = 1000;      // transitions before updates start
    std::vector<int> hidden = {256, 256};
    int buffer_capacity = 100000;
    int steps_per_update = 1; // env control steps per gradient step
};

struct TrainSchedule {
    int n_iter = 10;
    int n_mu = 10;
    int n_v = 10;
    int n_step = 1000;
};

struct ExperimentConfig {
    int n_bv = 3;
    double v_bar = 8.0; // target average velocity (m/s)
    int h_max = 240;    // control steps per episode
    RoadGeometry road;
    VehicleDims dims;
    SimParams sim;
    ObservationConfig obs;
    StartPoolConfig start_pool;
    RewardCoeffs rewards;
    IdmParams idm;
    SacHyper sac;
    TrainSchedule schedule;
    std::vector<std::uint64_t> eval_seeds = {1, 2, 3};
    int eval_episodes = 20;
    int pretrain_steps = 20000;

    double dt_control() const { return sim.dt_phys * sim.frames_per_step; }
    int start_capacity() const { return road.n_lanes * start_pool.n_slots; }
    void validate() const; // throws std::invalid_argument on violations
};

// Flat dotted-key config file support. Unknown keys are rejected.
using ConfigKv = std::map<std::string, std::string>;

ConfigKv config_to_kv(const ExperimentConfig& cfg);
ExperimentConfig config_from_kv(const ConfigKv& kv); // starts from defaults
ConfigKv parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
std::string canonical_config_text(const ExperimentConfig& cfg); // sorted keys

// fnv1a-64 hex digest over the sorted identity keys (environment, physics,
// rewards, networks); run-length knobs are excluded so checkpoints stay
// loadable across schedule and evaluation variations.
std::string config_hash(const ExperimentConfig& cfg);

// shortest decimal text that round-trips to the same double
std::string format_double(double v);
std::uint64_t fnv1a64(const std::string& data);

} // namespace nearmiss
