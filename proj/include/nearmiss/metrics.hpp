#pragma once

#include <memory>
#include <optional>

#include "nearmiss/env.hpp"
#include "nearmiss/logio.hpp"
#include "nearmiss/sac.hpp"

namespace nearmiss {

struct EpisodeMetrics {
    int n_collisions = 0;      // distinct AV-BV pairs that made contact
    double duration_s = 0.0;
    double av_distance_m = 0.0;
    double j_max = 0.0;        // kg*m/s, 0 without collisions
    long obf = 0;              // frames with at least one occluding BV
    TerminationReason reason = TerminationReason::none;
};

// CPS = N_col / T_tt (collisions per second). Throws when t_total <= 0.
double compute_cps(int n_col, double t_total);

// CPM = N_col / D_tt with D_tt in hundred-meter units. Throws when
// distance <= 0.
double compute_cpm(int n_col, double distance_m);

// Recomputes the episode metrics from a scenario record alone.
EpisodeMetrics episode_metrics(const ScenarioRecord& log);

EpisodeMetrics metrics_from_live(const LiveMetrics& live, TerminationReason reason);

// s_0 = x_0; s_t = c * x_t + (1 - c) * s_{t-1}. c = 1 is the identity.
// Throws when c is outside (0, 1].
std::vector<double> smooth_series(const std::vector<double>& values, double c);

// Spearman rank correlation with average ranks for ties; 0 when either side
// has no variance.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct PolicySpec {
    enum class Kind { autopilot, network };
    Kind kind = Kind::autopilot;
    std::shared_ptr<const ActorParams> actor; // used when kind == network
    std::string source = "autopilot";

    static PolicySpec make_autopilot() { return {}; }
    static PolicySpec make_network(std::shared_ptr<const ActorParams> a, std::string src);
};

struct MetricsRow {
    int round = 0;
    std::uint64_t seed = 0;
    int episode = 0;
    EpisodeMetrics m;
    double cps = 0.0; // per-episode ratios
    double cpm = 0.0;
};

// Per (round, seed): totals-based CPS/CPM, means of j_max and obf.
struct SeedSummary {
    int round = 0;
    std::uint64_t seed = 0;
    int episodes = 0;
    double cps = 0.0;
    double cpm = 0.0;
    double jmax_mean = 0.0;
    double obf_mean = 0.0;
};

struct RoundAggregate {
    int round = 0;
    double cps_mean = 0, cps_std = 0;
    double cpm_mean = 0, cpm_std = 0;
    double jmax_mean = 0, jmax_std = 0;
    double obf_mean = 0, obf_std = 0;
};

struct MetricsReport {
    std::vector<MetricsRow> rows;
    std::vector<SeedSummary> seed_summaries;
    std::vector<RoundAggregate> aggregates; // mean and std over seeds per round
};

// Deterministic matchup: both policies act via their deterministic modes;
// scene seeds derive from (seed, episode index). Episodes also land in
// record_sink when provided (for logging / replay tests).
MetricsReport run_matchup(const PolicySpec& av, const PolicySpec& bv, int episodes,
                          const std::vector<std::uint64_t>& seeds,
                          const ExperimentConfig& config, int round_label = 0,
                          std::vector<ScenarioRecord>* record_sink = nullptr);

// Loads the varying role's per-round checkpoints from ckpt_dir
// (ckpt_<role>_round_<k>.txt) and runs one matchup per round. Missing rounds
// raise a load error naming the round; hash mismatches are refused unless
// force is set.
MetricsReport checkpoint_sweep(const PolicySpec& fixed, AgentRole varying,
                               const std::vector<int>& rounds, const std::string& ckpt_dir,
                               int episodes, const std::vector<std::uint64_t>& seeds,
                               const ExperimentConfig& config, bool force = false);

MetricsReport merge_reports(const std::vector<MetricsReport>& parts);

void write_metrics_csv(const std::string& path, const MetricsReport& report);
void write_aggregate_csv(const std::string& path, const MetricsReport& report,
                         double smooth_c = 1.0);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);
MetricsReport report_from_rows(std::vector<MetricsRow> rows);

} // namespace nearmiss
