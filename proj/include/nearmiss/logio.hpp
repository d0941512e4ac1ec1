#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nearmiss/geometry.hpp"
#include "nearmiss/rewards.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

struct LogVehicle {
    int id = 0;
    double x = 0, y = 0, v = 0, theta = 0, accel = 0, omega = 0;
    double p = 0, delta = 0; // controls applied during this step
};

struct LogEvents {
    std::vector<CollisionEvent> collisions;
    std::vector<int> occluding_bv_ids;
    double d_min = 0.0;
};

// One record per physics frame (the paper's f counts these within a step).
struct LogFrame {
    double t = 0.0;
    int control_step = 0;
    std::vector<LogVehicle> vehicles;
    LogEvents events;
    bool step_end = false; // last frame of a control step carries the rewards
    DriveReward av_reward;
    AttackReward bv_reward;
};

struct LogHeader {
    std::string config_hash;
    std::uint64_t scene_seed = 0;
    std::string av_spec = "?";
    std::string bv_spec = "?";
    double dt_phys = 0.05;
    int frames_per_step = 5;
    Scene initial; // needed to reconstruct travelled distance on replay
};

// Serialized scenario: a header plus the frame chain.
struct ScenarioRecord {
    LogHeader header;
    std::vector<LogFrame> frames;
    TerminationReason termination = TerminationReason::none;
};

// Line-delimited records: one header line, then one line per physics frame.
// Writes are line-atomic so a crashed run leaves a readable prefix.
void write_log(const std::string& path, const ScenarioRecord& record);

// Validates monotone time and a constant vehicle count; throws
// std::runtime_error with the offending line number on schema violations.
ScenarioRecord read_log(const std::string& path);

// Flat per-(frame, vehicle) CSV for external plotting.
void write_replay_csv(const std::string& path, const ScenarioRecord& record);

} // namespace nearmiss
