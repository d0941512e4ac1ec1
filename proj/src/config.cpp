#include "nearmiss/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nearmiss {

std::string format_double(double v) {
    for (int prec = 1; prec <= 17; ++prec) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::stod(buf) == v) return buf;
    }
    return "0";
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

namespace {

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::string join_u64(const std::vector<std::uint64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw std::invalid_argument("config: bad numeric value for " + key + ": '" + v + "'");
    }
}

int to_int(const std::string& key, const std::string& v) {
    double d = to_double(key, v);
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d)
        throw std::invalid_argument("config: expected integer for " + key + ": '" + v + "'");
    return i;
}

} // namespace

ConfigKv config_to_kv(const ExperimentConfig& c) {
    ConfigKv kv;
    auto put_d = [&](const std::string& k, double v) { kv[k] = format_double(v); };
    auto put_i = [&](const std::string& k, int v) { kv[k] = std::to_string(v); };

    put_i("scenario.n_bv", c.n_bv);
    put_d("scenario.v_bar", c.v_bar);
    put_i("episode.h_max", c.h_max);

    put_i("road.n_lanes", c.road.n_lanes);
    put_d("road.lane_width", c.road.lane_width);
    put_d("road.length", c.road.length);

    put_d("vehicle.length", c.dims.length);
    put_d("vehicle.width", c.dims.width);
    put_d("vehicle.mass", c.dims.mass);
    put_d("vehicle.l_f", c.dims.l_f);
    put_d("vehicle.l_r", c.dims.l_r);

    put_d("physics.dt_phys", c.sim.dt_phys);
    put_i("physics.frames_per_step", c.sim.frames_per_step);
    put_d("limits.a_max", c.sim.limits.a_max);
    put_d("limits.b_max", c.sim.limits.b_max);
    put_d("limits.phi_max", c.sim.limits.phi_max_deg);
    put_d("occlusion.range", c.sim.occlusion.range);
    put_d("occlusion.half_angle", c.sim.occlusion.half_angle_deg);
    put_d("impulse.restitution", c.sim.impulse.restitution);

    put_i("observation.k_obs", c.obs.k_obs);
    put_d("observation.pos_scale", c.obs.pos_scale);
    put_d("observation.v_scale", c.obs.v_scale);
    put_d("observation.omega_scale", c.obs.omega_scale);

    put_i("start_pool.pool_size", c.start_pool.pool_size);
    put_i("start_pool.n_slots", c.start_pool.n_slots);
    put_d("start_pool.slot_spacing", c.start_pool.slot_spacing);
    put_d("start_pool.first_slot_y", c.start_pool.first_slot_y);
    put_d("start_pool.jitter", c.start_pool.jitter);

    const auto a = c.rewards.as_vector();
    for (int i = 0; i < 9; ++i)
        put_d("rewards.alpha" + std::to_string(i + 1), a[static_cast<std::size_t>(i)]);

    put_d("idm.v0", c.idm.v0);
    put_d("idm.T", c.idm.T);
    put_d("idm.a_idm", c.idm.a_idm);
    put_d("idm.b_idm", c.idm.b_idm);
    put_d("idm.s0", c.idm.s0);
    put_d("idm.k_p", c.idm.k_p);
    put_d("idm.k_d", c.idm.k_d);

    put_d("sac.gamma", c.sac.gamma);
    put_d("sac.tau", c.sac.tau);
    put_d("sac.lr", c.sac.lr);
    put_i("sac.batch", c.sac.batch);
    put_d("sac.alpha_ent", c.sac.alpha_ent);
    put_i("sac.warmup", c.sac.warmup);
    kv["sac.hidden"] = join_ints(c.sac.hidden);
    put_i("sac.buffer_capacity", c.sac.buffer_capacity);
    put_i("sac.steps_per_update", c.sac.steps_per_update);

    put_i("schedule.n_iter", c.schedule.n_iter);
    put_i("schedule.n_mu", c.schedule.n_mu);
    put_i("schedule.n_v", c.schedule.n_v);
    put_i("schedule.n_step", c.schedule.n_step);

    kv["eval.seeds"] = join_u64(c.eval_seeds);
    put_i("eval.episodes", c.eval_episodes);
    put_i("pretrain.steps", c.pretrain_steps);
    return kv;
}

ExperimentConfig config_from_kv(const ConfigKv& kv) {
    ExperimentConfig c;
    const ConfigKv known = config_to_kv(c);
    for (const auto& [key, _] : kv)
        if (!known.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "'");

    auto get_d = [&](const std::string& k, double& ref) {
        auto it = kv.find(k);
        if (it != kv.end()) ref = to_double(k, it->second);
    };
    auto get_i = [&](const std::string& k, int& ref) {
        auto it = kv.find(k);
        if (it != kv.end()) ref = to_int(k, it->second);
    };

    get_i("scenario.n_bv", c.n_bv);
    get_d("scenario.v_bar", c.v_bar);
    get_i("episode.h_max", c.h_max);
    get_i("road.n_lanes", c.road.n_lanes);
    get_d("road.lane_width", c.road.lane_width);
    get_d("road.length", c.road.length);
    get_d("vehicle.length", c.dims.length);
    get_d("vehicle.width", c.dims.width);
    get_d("vehicle.mass", c.dims.mass);
    get_d("vehicle.l_f", c.dims.l_f);
    get_d("vehicle.l_r", c.dims.l_r);
    get_d("physics.dt_phys", c.sim.dt_phys);
    get_i("physics.frames_per_step", c.sim.frames_per_step);
    get_d("limits.a_max", c.sim.limits.a_max);
    get_d("limits.b_max", c.sim.limits.b_max);
    get_d("limits.phi_max", c.sim.limits.phi_max_deg);
    get_d("occlusion.range", c.sim.occlusion.range);
    get_d("occlusion.half_angle", c.sim.occlusion.half_angle_deg);
    get_d("impulse.restitution", c.sim.impulse.restitution);
    get_i("observation.k_obs", c.obs.k_obs);
    get_d("observation.pos_scale", c.obs.pos_scale);
    get_d("observation.v_scale", c.obs.v_scale);
    get_d("observation.omega_scale", c.obs.omega_scale);
    get_i("start_pool.pool_size", c.start_pool.pool_size);
    get_i("start_pool.n_slots", c.start_pool.n_slots);
    get_d("start_pool.slot_spacing", c.start_pool.slot_spacing);
    get_d("start_pool.first_slot_y", c.start_pool.first_slot_y);
    get_d("start_pool.jitter", c.start_pool.jitter);
    get_d("rewards.alpha1", c.rewards.alpha1);
    get_d("rewards.alpha2", c.rewards.alpha2);
    get_d("rewards.alpha3", c.rewards.alpha3);
    get_d("rewards.alpha4", c.rewards.alpha4);
    get_d("rewards.alpha5", c.rewards.alpha5);
    get_d("rewards.alpha6", c.rewards.alpha6);
    get_d("rewards.alpha7", c.rewards.alpha7);
    get_d("rewards.alpha8", c.rewards.alpha8);
    get_d("rewards.alpha9", c.rewards.alpha9);
    get_d("idm.v0", c.idm.v0);
    get_d("idm.T", c.idm.T);
    get_d("idm.a_idm", c.idm.a_idm);
    get_d("idm.b_idm", c.idm.b_idm);
    get_d("idm.s0", c.idm.s0);
    get_d("idm.k_p", c.idm.k_p);
    get_d("idm.k_d", c.idm.k_d);
    get_d("sac.gamma", c.sac.gamma);
    get_d("sac.tau", c.sac.tau);
    get_d("sac.lr", c.sac.lr);
    get_i("sac.batch", c.sac.batch);
    get_d("sac.alpha_ent", c.sac.alpha_ent);
    get_i("sac.warmup", c.sac.warmup);
    get_i("sac.buffer_capacity", c.sac.buffer_capacity);
    get_i("sac.steps_per_update", c.sac.steps_per_update);
    get_i("schedule.n_iter", c.schedule.n_iter);
    get_i("schedule.n_mu", c.schedule.n_mu);
    get_i("schedule.n_v", c.schedule.n_v);
    get_i("schedule.n_step", c.schedule.n_step);
    get_i("eval.episodes", c.eval_episodes);
    get_i("pretrain.steps", c.pretrain_steps);

    if (auto it = kv.find("sac.hidden"); it != kv.end()) {
        c.sac.hidden.clear();
        for (const auto& part : split(it->second, ','))
            c.sac.hidden.push_back(to_int("sac.hidden", trim(part)));
    }
    if (auto it = kv.find("eval.seeds"); it != kv.end()) {
        c.eval_seeds.clear();
        for (const auto& part : split(it->second, ','))
            c.eval_seeds.push_back(
                static_cast<std::uint64_t>(std::stoull(trim(part))));
    }

    c.validate();
    return c;
}

ConfigKv parse_config_text(const std::string& text) {
    ConfigKv kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: missing '=' on line " + std::to_string(lineno));
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config: empty key on line " + std::to_string(lineno));
        kv[key] = value;
    }
    return kv;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return config_from_kv(parse_config_text(ss.str()));
}

std::string canonical_config_text(const ExperimentConfig& cfg) {
    std::string out;
    for (const auto& [k, v] : config_to_kv(cfg)) // std::map iterates sorted
        out += k + " = " + v + "\n";
    return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
    // the hash covers the keys that determine checkpoint compatibility:
    // environment, physics, rewards and network settings. Run-length knobs
    // (schedule.*, eval.*, pretrain.*) can change between runs that share
    // checkpoints, so they stay outside the digest.
    std::string identity;
    for (const auto& [k, v] : config_to_kv(cfg)) {
        if (k.rfind("schedule.", 0) == 0 || k.rfind("eval.", 0) == 0 ||
            k.rfind("pretrain.", 0) == 0)
            continue;
        identity += k + " = " + v + "\n";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(identity)));
    return buf;
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(std::string("config: ") + what);
    };
    require(n_bv >= 1, "n_bv must be >= 1");
    require(h_max >= 1, "h_max must be >= 1");
    require(v_bar > 0.0, "v_bar must be positive");
    require(road.n_lanes >= 2, "road needs at least 2 lanes");
    require(road.lane_width > 0.0 && road.length > 0.0, "road dimensions must be positive");
    require(dims.length > 0.0 && dims.width > 0.0 && dims.mass > 0.0 && dims.l_f > 0.0 &&
                dims.l_r > 0.0,
            "vehicle dimensions must be positive");
    require(dims.l_f + dims.l_r < dims.length, "axle spacing must fit inside the body");
    require(sim.dt_phys > 0.0, "dt_phys must be positive");
    require(sim.frames_per_step >= 1, "frames_per_step must be >= 1");
    require(sim.limits.a_max > 0.0 && sim.limits.b_max > 0.0 && sim.limits.phi_max_deg > 0.0,
            "control limits must be positive");
    require(sim.occlusion.range > 0.0, "occlusion range must be positive");
    require(sim.occlusion.half_angle_deg > 0.0 && sim.occlusion.half_angle_deg < 90.0,
            "occlusion half-angle must lie in (0, 90)");
    require(sim.impulse.restitution >= 0.0 && sim.impulse.restitution <= 1.0,
            "restitution must lie in [0, 1]");
    require(obs.k_obs >= 1, "k_obs must be >= 1");
    require(obs.pos_scale > 0.0 && obs.v_scale > 0.0 && obs.omega_scale > 0.0,
            "observation scales must be positive");
    require(start_pool.pool_size >= 1 && start_pool.n_slots >= 1,
            "start pool must be non-empty");
    require(start_pool.slot_spacing > dims.length + 2.0 * start_pool.jitter,
            "slot spacing too small for jitter and vehicle length");
    const auto a = rewards.as_vector();
    for (double x : a) require(x >= 0.0, "reward coefficients must be non-negative");
    require(sac.gamma > 0.0 && sac.gamma < 1.0, "gamma must lie in (0, 1)");
    require(sac.tau > 0.0 && sac.tau <= 1.0, "tau must lie in (0, 1]");
    require(sac.lr > 0.0, "learning rate must be positive");
    require(sac.batch >= 1, "batch must be >= 1");
    require(sac.warmup >= 0, "warmup must be >= 0");
    require(!sac.hidden.empty(), "at least one hidden layer required");
    for (int h : sac.hidden) require(h >= 1, "hidden sizes must be >= 1");
    require(sac.buffer_capacity >= 1, "buffer capacity must be >= 1");
    require(sac.steps_per_update >= 1, "steps_per_update must be >= 1");
    require(schedule.n_iter >= 1 && schedule.n_mu >= 1 && schedule.n_v >= 1 &&
                schedule.n_step >= 1,
            "schedule counts must be >= 1");
    require(!eval_seeds.empty(), "eval seeds must be non-empty");
    require(eval_episodes >= 1, "eval episodes must be >= 1");
    require(pretrain_steps >= 1, "pretrain steps must be >= 1");
}

} // namespace nearmiss
