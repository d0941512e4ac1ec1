#include "nearmiss/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "nearmiss/checkpoint.hpp"
#include "nearmiss/rarl.hpp"

namespace nearmiss {

double compute_cps(int n_col, double t_total) {
    if (t_total <= 0.0) throw std::domain_error("compute_cps: total time must be positive");
    return static_cast<double>(n_col) / t_total;
}

double compute_cpm(int n_col, double distance_m) {
    if (distance_m <= 0.0)
        throw std::domain_error("compute_cpm: distance must be positive");
    return static_cast<double>(n_col) / (distance_m / 100.0);
}

EpisodeMetrics episode_metrics(const ScenarioRecord& log) {
    if (log.header.initial.vehicles.empty())
        throw std::runtime_error("episode_metrics: malformed log (no initial scene)");
    EpisodeMetrics m;
    m.reason = log.termination;
    const int av_id = log.header.initial.vehicles[0].id;

    std::vector<std::pair<int, int>> pairs;
    double prev_x = log.header.initial.vehicles[0].state.x;
    double prev_y = log.header.initial.vehicles[0].state.y;
    for (const auto& f : log.frames) {
        for (const auto& c : f.events.collisions) {
            if (c.a != av_id && c.b != av_id) continue;
            const std::pair<int, int> key{std::min(c.a, c.b), std::max(c.a, c.b)};
            if (std::find(pairs.begin(), pairs.end(), key) == pairs.end()) pairs.push_back(key);
            m.j_max = std::max(m.j_max, c.impulse);
        }
        if (!f.events.occluding_bv_ids.empty()) m.obf += 1;
        const LogVehicle* av = nullptr;
        for (const auto& v : f.vehicles)
            if (v.id == av_id) av = &v;
        if (!av) throw std::runtime_error("episode_metrics: malformed log (AV missing)");
        m.av_distance_m += std::hypot(av->x - prev_x, av->y - prev_y);
        prev_x = av->x;
        prev_y = av->y;
    }
    m.n_collisions = static_cast<int>(pairs.size());
    m.duration_s = log.frames.empty()
                       ? 0.0
                       : log.frames.back().t - log.header.initial.t;
    return m;
}

EpisodeMetrics metrics_from_live(const LiveMetrics& live, TerminationReason reason) {
    EpisodeMetrics m;
    m.n_collisions = static_cast<int>(live.collided_pairs.size());
    m.duration_s = live.duration_s;
    m.av_distance_m = live.av_distance_m;
    m.j_max = live.j_max;
    m.obf = live.obf;
    m.reason = reason;
    return m;
}

std::vector<double> smooth_series(const std::vector<double>& values, double c) {
    if (!(c > 0.0 && c <= 1.0))
        throw std::domain_error("smooth_series: coefficient must lie in (0, 1]");
    if (values.empty()) throw std::domain_error("smooth_series: empty sequence");
    std::vector<double> out;
    out.reserve(values.size());
    out.push_back(values[0]);
    for (std::size_t i = 1; i < values.size(); ++i)
        out.push_back(c * values[i] + (1.0 - c) * out.back());
    return out;
}

namespace {

std::vector<double> average_ranks(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double cov = 0, va = 0, vb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        cov += (a[i] - ma) * (b[i] - mb);
        va += (a[i] - ma) * (a[i] - ma);
        vb += (b[i] - mb) * (b[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 0.0;
    return cov / std::sqrt(va * vb);
}

} // namespace

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("spearman: need two equal-length series");
    return pearson(average_ranks(x), average_ranks(y));
}

PolicySpec PolicySpec::make_network(std::shared_ptr<const ActorParams> a, std::string src) {
    PolicySpec s;
    s.kind = Kind::network;
    s.actor = std::move(a);
    s.source = std::move(src);
    return s;
}

namespace {

std::unique_ptr<Driver> make_driver(const PolicySpec& spec, const ExperimentConfig& config) {
    if (spec.kind == PolicySpec::Kind::autopilot)
        return std::make_unique<AutopilotDriver>(config);
    if (!spec.actor) throw std::runtime_error("policy spec has no loaded parameters");
    return std::make_unique<PolicyDriver>(*spec.actor, false, spec.source);
}

double stddev(const std::vector<double>& v, double mean) {
    if (v.size() < 2) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace

MetricsReport run_matchup(const PolicySpec& av, const PolicySpec& bv, int episodes,
                          const std::vector<std::uint64_t>& seeds,
                          const ExperimentConfig& config, int round_label,
                          std::vector<ScenarioRecord>* record_sink) {
    if (episodes < 1) throw std::invalid_argument("run_matchup: episodes must be >= 1");
    const auto av_driver = make_driver(av, config);
    const auto bv_driver = make_driver(bv, config);
    MetricsReport report;

    for (std::uint64_t seed : seeds) {
        int total_col = 0;
        double total_time = 0.0, total_dist = 0.0, jmax_sum = 0.0, obf_sum = 0.0;
        for (int e = 0; e < episodes; ++e) {
            const std::uint64_t scene_seed = mix_seed(seed, static_cast<std::uint64_t>(e));
            Episode episode(config, scene_seed);
            episode.set_specs(av.source, bv.source);
            RngStream rng(mix_seed(scene_seed, 0xd15c)); // drivers are deterministic
            while (!episode.done()) {
                const Scene& scene = episode.scene();
                std::vector<Action> actions(scene.vehicles.size());
                for (std::size_t i = 0; i < scene.vehicles.size(); ++i) {
                    const ObservationVector obs =
                        encode_observation(scene, scene.vehicles[i].id, config);
                    actions[i] = (i == 0)
                                     ? av_driver->act(scene, scene.vehicles[i].id, obs, rng)
                                     : bv_driver->act(scene, scene.vehicles[i].id, obs, rng);
                }
                episode.step(actions);
            }
            const EpisodeMetrics m = metrics_from_live(episode.live(), episode.reason());
            MetricsRow row;
            row.round = round_label;
            row.seed = seed;
            row.episode = e;
            row.m = m;
            row.cps = m.duration_s > 0.0 ? compute_cps(m.n_collisions, m.duration_s) : 0.0;
            row.cpm = m.av_distance_m > 0.0 ? compute_cpm(m.n_collisions, m.av_distance_m) : 0.0;
            report.rows.push_back(row);
            if (record_sink) record_sink->push_back(episode.record());

            total_col += m.n_collisions;
            total_time += m.duration_s;
            total_dist += m.av_distance_m;
            jmax_sum += m.j_max;
            obf_sum += static_cast<double>(m.obf);
        }
        SeedSummary s;
        s.round = round_label;
        s.seed = seed;
        s.episodes = episodes;
        s.cps = total_time > 0.0 ? compute_cps(total_col, total_time) : 0.0;
        s.cpm = total_dist > 0.0 ? compute_cpm(total_col, total_dist) : 0.0;
        s.jmax_mean = jmax_sum / static_cast<double>(episodes);
        s.obf_mean = obf_sum / static_cast<double>(episodes);
        report.seed_summaries.push_back(s);
    }

    // cross-seed aggregate for this round
    std::vector<double> cps, cpm, jm, ob;
    for (const auto& s : report.seed_summaries) {
        cps.push_back(s.cps);
        cpm.push_back(s.cpm);
        jm.push_back(s.jmax_mean);
        ob.push_back(s.obf_mean);
    }
    RoundAggregate agg;
    agg.round = round_label;
    const double n = static_cast<double>(cps.size());
    agg.cps_mean = std::accumulate(cps.begin(), cps.end(), 0.0) / n;
    agg.cpm_mean = std::accumulate(cpm.begin(), cpm.end(), 0.0) / n;
    agg.jmax_mean = std::accumulate(jm.begin(), jm.end(), 0.0) / n;
    agg.obf_mean = std::accumulate(ob.begin(), ob.end(), 0.0) / n;
    agg.cps_std = stddev(cps, agg.cps_mean);
    agg.cpm_std = stddev(cpm, agg.cpm_mean);
    agg.jmax_std = stddev(jm, agg.jmax_mean);
    agg.obf_std = stddev(ob, agg.obf_mean);
    report.aggregates.push_back(agg);
    return report;
}

MetricsReport merge_reports(const std::vector<MetricsReport>& parts) {
    MetricsReport out;
    for (const auto& p : parts) {
        out.rows.insert(out.rows.end(), p.rows.begin(), p.rows.end());
        out.seed_summaries.insert(out.seed_summaries.end(), p.seed_summaries.begin(),
                                  p.seed_summaries.end());
        out.aggregates.insert(out.aggregates.end(), p.aggregates.begin(), p.aggregates.end());
    }
    return out;
}

MetricsReport checkpoint_sweep(const PolicySpec& fixed, AgentRole varying,
                               const std::vector<int>& rounds, const std::string& ckpt_dir,
                               int episodes, const std::vector<std::uint64_t>& seeds,
                               const ExperimentConfig& config, bool force) {
    std::vector<MetricsReport> parts;
    const std::string expect_hash = config_hash(config);
    for (int round : rounds) {
        const std::string path = ckpt_dir + "/ckpt_" +
                                 (varying == AgentRole::AV ? "av" : "bv") + "_round_" +
                                 std::to_string(round) + ".txt";
        std::ifstream probe(path);
        if (!probe)
            throw std::runtime_error("checkpoint_sweep: missing checkpoint for round " +
                                     std::to_string(round) + ": " + path);
        probe.close();
        const PolicySpec varying_spec = PolicySpec::make_network(
            load_actor_file(path, expect_hash, force), "ckpt:" + path);
        if (varying == AgentRole::AV)
            parts.push_back(run_matchup(varying_spec, fixed, episodes, seeds, config, round));
        else
            parts.push_back(run_matchup(fixed, varying_spec, episodes, seeds, config, round));
    }
    return merge_reports(parts);
}

void write_metrics_csv(const std::string& path, const MetricsReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_metrics_csv: cannot open " + path);
    out << "round,seed,episode,n_collisions,duration_s,distance_m,cps,cpm,jmax,obf,termination\n";
    char buf[512];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof(buf), "%d,%llu,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%ld,%s\n",
                      r.round, static_cast<unsigned long long>(r.seed), r.episode,
                      r.m.n_collisions, r.m.duration_s, r.m.av_distance_m, r.cps, r.cpm,
                      r.m.j_max, r.m.obf, termination_name(r.m.reason));
        out << buf;
    }
}

void write_aggregate_csv(const std::string& path, const MetricsReport& report,
                         double smooth_c) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_aggregate_csv: cannot open " + path);
    out << "round,cps_mean,cps_std,cpm_mean,cpm_std,jmax_mean,jmax_std,obf_mean,obf_std\n";
    std::vector<RoundAggregate> aggs = report.aggregates;
    std::sort(aggs.begin(), aggs.end(),
              [](const RoundAggregate& a, const RoundAggregate& b) { return a.round < b.round; });
    std::vector<double> cps, cpm, jm, ob;
    for (const auto& a : aggs) {
        cps.push_back(a.cps_mean);
        cpm.push_back(a.cpm_mean);
        jm.push_back(a.jmax_mean);
        ob.push_back(a.obf_mean);
    }
    if (!aggs.empty() && smooth_c < 1.0) {
        cps = smooth_series(cps, smooth_c);
        cpm = smooth_series(cpm, smooth_c);
        jm = smooth_series(jm, smooth_c);
        ob = smooth_series(ob, smooth_c);
    }
    char buf[512];
    for (std::size_t i = 0; i < aggs.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      aggs[i].round, cps[i], aggs[i].cps_std, cpm[i], aggs[i].cpm_std, jm[i],
                      aggs[i].jmax_std, ob[i], aggs[i].obf_std);
        out << buf;
    }
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_metrics_csv: cannot open " + path);
    std::vector<MetricsRow> rows;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (f.size() != 11)
            throw std::runtime_error("read_metrics_csv: bad row: " + line);
        MetricsRow r;
        r.round = std::stoi(f[0]);
        r.seed = std::stoull(f[1]);
        r.episode = std::stoi(f[2]);
        r.m.n_collisions = std::stoi(f[3]);
        r.m.duration_s = std::stod(f[4]);
        r.m.av_distance_m = std::stod(f[5]);
        r.cps = std::stod(f[6]);
        r.cpm = std::stod(f[7]);
        r.m.j_max = std::stod(f[8]);
        r.m.obf = std::stol(f[9]);
        r.m.reason = termination_from_name(f[10]);
        rows.push_back(r);
    }
    return rows;
}

MetricsReport report_from_rows(std::vector<MetricsRow> rows) {
    MetricsReport report;
    report.rows = std::move(rows);
    std::map<std::pair<int, std::uint64_t>, std::vector<const MetricsRow*>> by_seed;
    for (const auto& r : report.rows) by_seed[{r.round, r.seed}].push_back(&r);
    std::map<int, std::vector<SeedSummary>> by_round;
    for (const auto& [key, rs] : by_seed) {
        SeedSummary s;
        s.round = key.first;
        s.seed = key.second;
        s.episodes = static_cast<int>(rs.size());
        int col = 0;
        double time = 0, dist = 0, jm = 0, ob = 0;
        for (const MetricsRow* r : rs) {
            col += r->m.n_collisions;
            time += r->m.duration_s;
            dist += r->m.av_distance_m;
            jm += r->m.j_max;
            ob += static_cast<double>(r->m.obf);
        }
        s.cps = time > 0.0 ? compute_cps(col, time) : 0.0;
        s.cpm = dist > 0.0 ? compute_cpm(col, dist) : 0.0;
        s.jmax_mean = jm / static_cast<double>(rs.size());
        s.obf_mean = ob / static_cast<double>(rs.size());
        report.seed_summaries.push_back(s);
        by_round[s.round].push_back(s);
    }
    for (const auto& [round, sums] : by_round) {
        std::vector<double> cps, cpm, jm, ob;
        for (const auto& s : sums) {
            cps.push_back(s.cps);
            cpm.push_back(s.cpm);
            jm.push_back(s.jmax_mean);
            ob.push_back(s.obf_mean);
        }
        RoundAggregate a;
        a.round = round;
        const double n = static_cast<double>(sums.size());
        a.cps_mean = std::accumulate(cps.begin(), cps.end(), 0.0) / n;
        a.cpm_mean = std::accumulate(cpm.begin(), cpm.end(), 0.0) / n;
        a.jmax_mean = std::accumulate(jm.begin(), jm.end(), 0.0) / n;
        a.obf_mean = std::accumulate(ob.begin(), ob.end(), 0.0) / n;
        a.cps_std = stddev(cps, a.cps_mean);
        a.cpm_std = stddev(cpm, a.cpm_mean);
        a.jmax_std = stddev(jm, a.jmax_mean);
        a.obf_std = stddev(ob, a.obf_mean);
        report.aggregates.push_back(a);
    }
    return report;
}

} // namespace nearmiss
