#pragma once

#include <cstdint>

#include "nearmiss/config.hpp"
#include "nearmiss/dynamics.hpp"
#include "nearmiss/logio.hpp"
#include "nearmiss/rewards.hpp"
#include "nearmiss/scenario.hpp"

namespace nearmiss {

struct EpisodeState {
    Scene scene;
    int step_count = 0;
    AttackHistory attack;
    bool done = false;
    TerminationReason reason = TerminationReason::none;
};

// First applicable reason wins: collision (any AV-BV overlap), off_road (AV
// center beyond a road edge), road_end (AV past the segment end), horizon.
std::pair<bool, TerminationReason> check_termination(const EpisodeState& episode,
                                                     const ExperimentConfig& config);

// Reward inputs seen from one vehicle: its own collision flag, speed and
// heading, with the shared scene-level extrema.
StepSummary make_drive_summary(const std::vector<SubStep>& substeps, int subject_id);

// Team attack summary: AV-centric impulse/gap/occlusion plus per-BV speed
// and |omega| statistics from the end-of-step scene.
StepSummary make_attack_summary(const std::vector<SubStep>& substeps);

// Live per-episode metric accumulation, kept independent of the log replay
// path so the two can be compared exactly.
struct LiveMetrics {
    std::vector<std::pair<int, int>> collided_pairs; // distinct AV-BV pairs
    double j_max = 0.0;
    long obf = 0;
    double duration_s = 0.0;
    double av_distance_m = 0.0;
};

// One episode: owns the scene, the step counter, the attack history, the
// scenario record and the live metrics.
class Episode {
public:
    Episode(const ExperimentConfig& config, std::uint64_t scene_seed);

    const Scene& scene() const { return state_.scene; }
    const EpisodeState& state() const { return state_; }
    bool done() const { return state_.done; }
    TerminationReason reason() const { return state_.reason; }
    int step_count() const { return state_.step_count; }

    struct StepResult {
        StepSummary av_summary;
        StepSummary attack_summary;
        DriveReward av_reward;
        AttackReward bv_reward;
        bool done = false;
        TerminationReason reason = TerminationReason::none;
    };

    // One control step; throws std::logic_error when already done.
    StepResult step(const std::vector<Action>& actions);

    const std::vector<SubStep>& last_substeps() const { return last_substeps_; }
    const ScenarioRecord& record() const { return record_; }
    const LiveMetrics& live() const { return live_; }

    void set_specs(const std::string& av_spec, const std::string& bv_spec) {
        record_.header.av_spec = av_spec;
        record_.header.bv_spec = bv_spec;
    }

private:
    const ExperimentConfig& config_;
    EpisodeState state_;
    std::vector<SubStep> last_substeps_;
    ScenarioRecord record_;
    LiveMetrics live_;
};

} // namespace nearmiss
