#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "nearmiss/checkpoint.hpp"
#include "nearmiss/config.hpp"
#include "nearmiss/logging.hpp"
#include "nearmiss/metrics.hpp"
#include "nearmiss/rarl.hpp"

namespace fs = std::filesystem;
using namespace nearmiss;

namespace {

// One CLI invocation owns its output directory; concurrent runs must use
// distinct --out paths.
class OutputDirLock {
public:
    explicit OutputDirLock(const std::string& dir) : path_(fs::path(dir) / ".nearmiss.lock") {
        fs::create_directories(dir);
        if (fs::exists(path_))
            throw std::runtime_error("output directory is locked by another run: " +
                                     path_.string());
        std::ofstream lock(path_);
        if (!lock) throw std::runtime_error("cannot create lock file " + path_.string());
        lock << "locked\n";
    }
    ~OutputDirLock() {
        std::error_code ec;
        fs::remove(path_, ec);
    }

private:
    fs::path path_;
};

void write_resolved_config(const ExperimentConfig& cfg, const std::string& out_dir) {
    std::ofstream out(fs::path(out_dir) / "config.resolved.txt");
    out << canonical_config_text(cfg);
}

ExperimentConfig resolve_config(const std::string& config_path) {
    if (config_path.empty()) {
        ExperimentConfig cfg;
        cfg.validate();
        return cfg;
    }
    return load_config_file(config_path);
}

PolicySpec parse_policy_spec(const std::string& spec, const ExperimentConfig& cfg,
                             bool force) {
    if (spec == "autopilot") return PolicySpec::make_autopilot();
    if (spec.rfind("ckpt:", 0) == 0) {
        const std::string path = spec.substr(5);
        return PolicySpec::make_network(load_actor_file(path, config_hash(cfg), force), spec);
    }
    throw CLI::ValidationError("policy spec must be 'autopilot' or 'ckpt:PATH', got '" +
                               spec + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ','))
        if (!part.empty()) seeds.push_back(std::stoull(part));
    if (seeds.empty()) throw CLI::ValidationError("empty --seeds list");
    return seeds;
}

std::vector<int> parse_round_list(const std::string& s) {
    // accepts "1,2,3" and "1-15"
    std::vector<int> rounds;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) {
        const auto dash = part.find('-');
        if (dash != std::string::npos && dash > 0) {
            const int lo = std::stoi(part.substr(0, dash));
            const int hi = std::stoi(part.substr(dash + 1));
            for (int r = lo; r <= hi; ++r) rounds.push_back(r);
        } else if (!part.empty()) {
            rounds.push_back(std::stoi(part));
        }
    }
    if (rounds.empty()) throw CLI::ValidationError("empty --rounds list");
    return rounds;
}

void save_sac_checkpoint(const SacState& sac, AgentRole role, int round,
                         const ExperimentConfig& cfg, const std::string& path) {
    save_checkpoint(path, checkpoint_from_sac(sac, role, round, config_hash(cfg)));
}

void save_snapshot_checkpoint(const PolicySnapshot& snap, const SacHyper& hp, AgentRole role,
                              int round, const ExperimentConfig& cfg,
                              const std::string& path) {
    SacState tmp;
    tmp.hp = hp;
    tmp.actor = snap.actor;
    tmp.q1 = snap.q1;
    tmp.q2 = snap.q2;
    tmp.q1_target = snap.q1_target;
    tmp.q2_target = snap.q2_target;
    save_sac_checkpoint(tmp, role, round, cfg, path);
}

void write_returns_csv(const std::string& path, const std::vector<double>& returns) {
    std::ofstream out(path);
    out << "episode,return\n";
    for (std::size_t i = 0; i < returns.size(); ++i)
        out << i << "," << format_double(returns[i]) << "\n";
}

int run_pretrain(const std::string& config_path, const std::string& role_str,
                 std::uint64_t seed, int steps, const std::string& out_dir, bool /*force*/) {
    const ExperimentConfig cfg = resolve_config(config_path);
    OutputDirLock lock(out_dir);
    write_resolved_config(cfg, out_dir);
    const AgentRole role = role_str == "av" ? AgentRole::AV : AgentRole::BV;
    RngStream rng(mix_seed(seed, role == AgentRole::AV ? 0xa1 : 0xb1));
    PretrainResult result = pretrain(role, cfg, steps > 0 ? steps : cfg.pretrain_steps, rng);
    const std::string ckpt_path =
        (fs::path(out_dir) / ("ckpt_" + role_str + "_pretrain.txt")).string();
    save_sac_checkpoint(result.sac, role, 0, cfg, ckpt_path);
    write_returns_csv((fs::path(out_dir) / "pretrain_returns.csv").string(),
                      result.episode_returns);
    if (result.aborted) {
        log_error("pretraining diverged: " + result.abort_reason +
                  " (last finite checkpoint written to " + ckpt_path + ")");
        return 2;
    }
    std::cout << "pretrained " << role_str << " for "
              << (steps > 0 ? steps : cfg.pretrain_steps) << " steps -> " << ckpt_path
              << "\n";
    return 0;
}

int run_train(const std::string& config_path, const std::string& av_ckpt,
              const std::string& bv_ckpt, int rounds, std::uint64_t seed,
              const std::string& out_dir, bool force) {
    ExperimentConfig cfg = resolve_config(config_path);
    if (rounds > 0) cfg.schedule.n_iter = rounds;
    OutputDirLock lock(out_dir);
    write_resolved_config(cfg, out_dir);
    const std::string hash = config_hash(cfg);

    RngStream rng(mix_seed(seed, 0x7a11));
    SacState av = make_sac(observation_dim(cfg), cfg.sac, rng.next_u64());
    SacState bv = make_sac(observation_dim(cfg), cfg.sac, rng.next_u64());
    if (!av_ckpt.empty()) apply_checkpoint(av, load_checkpoint_checked(av_ckpt, hash, force));
    if (!bv_ckpt.empty()) apply_checkpoint(bv, load_checkpoint_checked(bv_ckpt, hash, force));

    AlternateResult result = alternate_train(cfg.schedule, cfg, av, bv, rng);
    for (const auto& round : result.rounds) {
        const std::string stem = "_round_" + std::to_string(round.round) + ".txt";
        save_snapshot_checkpoint(round.av, cfg.sac, AgentRole::AV, round.round, cfg,
                                 (fs::path(out_dir) / ("ckpt_av" + stem)).string());
        save_snapshot_checkpoint(round.bv, cfg.sac, AgentRole::BV, round.round, cfg,
                                 (fs::path(out_dir) / ("ckpt_bv" + stem)).string());
    }
    if (result.aborted) {
        log_error("training diverged: " + result.abort_reason + " (" +
                  std::to_string(result.rounds.size()) + " completed rounds retained)");
        return 2;
    }
    std::cout << "trained " << result.rounds.size() << " rounds ("
              << result.env_steps_bv_phase << " BV-phase + " << result.env_steps_av_phase
              << " AV-phase control steps) -> " << out_dir << "\n";
    return 0;
}

int run_eval(const std::string& config_path, const std::string& av_spec,
             const std::string& bv_spec, int episodes, const std::string& seeds_str,
             const std::string& out_dir, bool force) {
    const ExperimentConfig cfg = resolve_config(config_path);
    OutputDirLock lock(out_dir);
    write_resolved_config(cfg, out_dir);
    const PolicySpec av = parse_policy_spec(av_spec, cfg, force);
    const PolicySpec bv = parse_policy_spec(bv_spec, cfg, force);
    const auto seeds = parse_seed_list(seeds_str);
    const int n_episodes = episodes > 0 ? episodes : cfg.eval_episodes;

    std::vector<ScenarioRecord> records;
    const MetricsReport report = run_matchup(av, bv, n_episodes, seeds, cfg, 0, &records);
    write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), report);
    write_aggregate_csv((fs::path(out_dir) / "aggregate.csv").string(), report);
    const fs::path log_dir = fs::path(out_dir) / "logs";
    fs::create_directories(log_dir);
    for (std::size_t i = 0; i < records.size(); ++i)
        write_log((log_dir / ("episode_" + std::to_string(i) + ".jsonl")).string(),
                  records[i]);
    std::cout << "evaluated " << av_spec << " vs " << bv_spec << ": " << report.rows.size()
              << " episodes -> " << out_dir << "\n";
    return 0;
}

int run_sweep(const std::string& config_path, const std::string& vary,
              const std::string& rounds_str, const std::string& ckpt_dir,
              const std::string& fixed_spec, int episodes, const std::string& seeds_str,
              const std::string& out_dir, bool force) {
    const ExperimentConfig cfg = resolve_config(config_path);
    OutputDirLock lock(out_dir);
    write_resolved_config(cfg, out_dir);
    const AgentRole varying = vary == "av" ? AgentRole::AV : AgentRole::BV;
    const PolicySpec fixed = parse_policy_spec(fixed_spec, cfg, force);
    const auto rounds = parse_round_list(rounds_str);
    const auto seeds = parse_seed_list(seeds_str);
    const int n_episodes = episodes > 0 ? episodes : cfg.eval_episodes;

    const MetricsReport report =
        checkpoint_sweep(fixed, varying, rounds, ckpt_dir, n_episodes, seeds, cfg, force);
    write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(), report);
    write_aggregate_csv((fs::path(out_dir) / "aggregate.csv").string(), report);
    std::cout << "swept " << rounds.size() << " rounds of " << vary << " -> " << out_dir
              << "\n";
    return 0;
}

int run_replay(const std::string& log_path, const std::string& csv_path) {
    const ScenarioRecord rec = read_log(log_path);
    write_replay_csv(csv_path, rec);
    const EpisodeMetrics m = episode_metrics(rec);
    std::cout << "replayed " << rec.frames.size() << " frames: collisions=" << m.n_collisions
              << " duration=" << format_double(m.duration_s)
              << "s distance=" << format_double(m.av_distance_m)
              << "m jmax=" << format_double(m.j_max) << " obf=" << m.obf << " -> " << csv_path
              << "\n";
    return 0;
}

int run_metrics(const std::string& in_dir, double smooth_c, const std::string& out_path) {
    const MetricsReport report =
        report_from_rows(read_metrics_csv((fs::path(in_dir) / "metrics.csv").string()));
    write_aggregate_csv(out_path, report, smooth_c);
    std::cout << "aggregated " << report.rows.size() << " rows over "
              << report.aggregates.size() << " rounds -> " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-miss adversarial driving trainer"};
    app.require_subcommand(1);

    std::string config_path, out_dir, role = "av", av_ckpt, bv_ckpt, av_spec = "autopilot",
                bv_spec = "autopilot", seeds_str = "1,2,3", log_path, csv_path,
                rounds_str = "1", vary = "bv", ckpt_dir, fixed_spec = "autopilot", in_dir;
    std::uint64_t seed = 0;
    int steps = 0, rounds = 0, episodes = 0;
    double smooth_c = 1.0;
    bool force = false;

    auto* pre = app.add_subcommand("pretrain", "SAC pretraining of one role vs autopilot");
    pre->add_option("--role", role, "av or bv")->check(CLI::IsMember({"av", "bv"}));
    pre->add_option("--config", config_path, "config file");
    pre->add_option("--seed", seed, "master seed")->required();
    pre->add_option("--steps", steps, "control steps (default config pretrain.steps)");
    pre->add_option("--out", out_dir, "output directory")->required();

    auto* train = app.add_subcommand("train", "alternating BV-attack / AV-drive training");
    train->add_option("--config", config_path, "config file");
    train->add_option("--av-ckpt", av_ckpt, "initial AV checkpoint");
    train->add_option("--bv-ckpt", bv_ckpt, "initial BV checkpoint");
    train->add_option("--rounds", rounds, "override schedule.n_iter");
    train->add_option("--seed", seed, "master seed")->required();
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_flag("--force", force, "ignore config hash mismatches");

    auto* eval = app.add_subcommand("eval", "deterministic matchup evaluation");
    eval->add_option("--config", config_path, "config file");
    eval->add_option("--av", av_spec, "autopilot or ckpt:PATH")->required();
    eval->add_option("--bv", bv_spec, "autopilot or ckpt:PATH")->required();
    eval->add_option("--episodes", episodes, "episodes per seed");
    eval->add_option("--seeds", seeds_str, "comma-separated seed list");
    eval->add_option("--out", out_dir, "output directory")->required();
    eval->add_flag("--force", force, "ignore config hash mismatches");

    auto* sweep = app.add_subcommand("sweep", "matchups across training-round checkpoints");
    sweep->add_option("--config", config_path, "config file");
    sweep->add_option("--vary", vary, "which role sweeps rounds")
        ->check(CLI::IsMember({"av", "bv"}));
    sweep->add_option("--rounds", rounds_str, "round list, e.g. 1,2,3 or 1-15")->required();
    sweep->add_option("--ckpt-dir", ckpt_dir, "directory with ckpt_<role>_round_K.txt")
        ->required();
    sweep->add_option("--fixed", fixed_spec, "the fixed opponent spec");
    sweep->add_option("--episodes", episodes, "episodes per seed");
    sweep->add_option("--seeds", seeds_str, "comma-separated seed list");
    sweep->add_option("--out", out_dir, "output directory")->required();
    sweep->add_flag("--force", force, "ignore config hash mismatches");

    auto* replay = app.add_subcommand("replay", "scenario log to CSV");
    replay->add_option("--log", log_path, "episode log (.jsonl)")->required();
    replay->add_option("--csv", csv_path, "output CSV")->required();

    auto* metrics = app.add_subcommand("metrics", "re-aggregate a metrics.csv");
    metrics->add_option("--in", in_dir, "directory containing metrics.csv")->required();
    metrics->add_option("--smooth", smooth_c, "exponential smoothing coefficient in (0,1]");
    metrics->add_option("--out", csv_path, "output aggregate CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // 0
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1; // usage error
    }

    try {
        if (pre->parsed()) return run_pretrain(config_path, role, seed, steps, out_dir, force);
        if (train->parsed())
            return run_train(config_path, av_ckpt, bv_ckpt, rounds, seed, out_dir, force);
        if (eval->parsed())
            return run_eval(config_path, av_spec, bv_spec, episodes, seeds_str, out_dir, force);
        if (sweep->parsed())
            return run_sweep(config_path, vary, rounds_str, ckpt_dir, fixed_spec, episodes,
                             seeds_str, out_dir, force);
        if (replay->parsed()) return run_replay(log_path, csv_path);
        if (metrics->parsed()) return run_metrics(in_dir, smooth_c, csv_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
