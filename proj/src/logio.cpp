#include "nearmiss/logio.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

namespace nearmiss {

using nlohmann::json;

namespace {

json scene_to_json(const Scene& s) {
    json veh = json::array();
    for (const auto& v : s.vehicles)
        veh.push_back({v.id, v.state.x, v.state.y, v.state.v, v.state.theta, v.state.accel,
                       v.state.omega});
    return json{{"t", s.t},
                {"road", {s.road.n_lanes, s.road.lane_width, s.road.length}},
                {"dims",
                 {s.vehicles.empty() ? VehicleDims{}.length : s.vehicles[0].dims.length,
                  s.vehicles.empty() ? VehicleDims{}.width : s.vehicles[0].dims.width,
                  s.vehicles.empty() ? VehicleDims{}.mass : s.vehicles[0].dims.mass,
                  s.vehicles.empty() ? VehicleDims{}.l_f : s.vehicles[0].dims.l_f,
                  s.vehicles.empty() ? VehicleDims{}.l_r : s.vehicles[0].dims.l_r}},
                {"veh", veh}};
}

Scene scene_from_json(const json& j) {
    Scene s;
    s.t = j.at("t").get<double>();
    const auto& road = j.at("road");
    s.road.n_lanes = road.at(0).get<int>();
    s.road.lane_width = road.at(1).get<double>();
    s.road.length = road.at(2).get<double>();
    VehicleDims dims;
    const auto& d = j.at("dims");
    dims.length = d.at(0).get<double>();
    dims.width = d.at(1).get<double>();
    dims.mass = d.at(2).get<double>();
    dims.l_f = d.at(3).get<double>();
    dims.l_r = d.at(4).get<double>();
    for (const auto& v : j.at("veh")) {
        SceneVehicle sv;
        sv.id = v.at(0).get<int>();
        sv.state.x = v.at(1).get<double>();
        sv.state.y = v.at(2).get<double>();
        sv.state.v = v.at(3).get<double>();
        sv.state.theta = v.at(4).get<double>();
        sv.state.accel = v.at(5).get<double>();
        sv.state.omega = v.at(6).get<double>();
        sv.dims = dims;
        s.vehicles.push_back(sv);
    }
    return s;
}

json frame_to_json(const LogFrame& f) {
    json veh = json::array();
    for (const auto& v : f.vehicles)
        veh.push_back({v.id, v.x, v.y, v.v, v.theta, v.accel, v.omega, v.p, v.delta});
    json col = json::array();
    for (const auto& c : f.events.collisions) col.push_back({c.a, c.b, c.impulse});
    json j{{"t", f.t},
           {"cs", f.control_step},
           {"veh", veh},
           {"ev", {{"col", col}, {"occ", f.events.occluding_bv_ids}, {"dmin", f.events.d_min}}}};
    if (f.step_end) {
        j["drive"] = {f.av_reward.collision, f.av_reward.speed, f.av_reward.yaw,
                      f.av_reward.cooperation, f.av_reward.total};
        j["attack"] = {f.bv_reward.speed, f.bv_reward.distance, f.bv_reward.lane,
                       f.bv_reward.obstacle, f.bv_reward.impulse, f.bv_reward.total};
    }
    return j;
}

LogFrame frame_from_json(const json& j) {
    LogFrame f;
    f.t = j.at("t").get<double>();
    f.control_step = j.at("cs").get<int>();
    for (const auto& v : j.at("veh")) {
        LogVehicle lv;
        lv.id = v.at(0).get<int>();
        lv.x = v.at(1).get<double>();
        lv.y = v.at(2).get<double>();
        lv.v = v.at(3).get<double>();
        lv.theta = v.at(4).get<double>();
        lv.accel = v.at(5).get<double>();
        lv.omega = v.at(6).get<double>();
        lv.p = v.at(7).get<double>();
        lv.delta = v.at(8).get<double>();
        f.vehicles.push_back(lv);
    }
    const auto& ev = j.at("ev");
    for (const auto& c : ev.at("col"))
        f.events.collisions.push_back(
            {c.at(0).get<int>(), c.at(1).get<int>(), c.at(2).get<double>()});
    f.events.occluding_bv_ids = ev.at("occ").get<std::vector<int>>();
    f.events.d_min = ev.at("dmin").get<double>();
    if (j.contains("drive")) {
        f.step_end = true;
        const auto& d = j.at("drive");
        f.av_reward = {d.at(0), d.at(1), d.at(2), d.at(3), d.at(4)};
        const auto& a = j.at("attack");
        f.bv_reward = {a.at(0), a.at(1), a.at(2), a.at(3), a.at(4), a.at(5)};
    }
    return f;
}

} // namespace

void write_log(const std::string& path, const ScenarioRecord& record) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_log: cannot open " + path);
    json header{{"type", "nearmiss-log"},
                {"version", 1},
                {"config_hash", record.header.config_hash},
                {"seed", record.header.scene_seed},
                {"av", record.header.av_spec},
                {"bv", record.header.bv_spec},
                {"dt_phys", record.header.dt_phys},
                {"frames_per_step", record.header.frames_per_step},
                {"init", scene_to_json(record.header.initial)}};
    out << header.dump() << "\n";
    for (std::size_t i = 0; i < record.frames.size(); ++i) {
        json j = frame_to_json(record.frames[i]);
        if (i + 1 == record.frames.size() && record.termination != TerminationReason::none)
            j["term"] = termination_name(record.termination);
        out << j.dump() << "\n";
        out.flush(); // line-atomic: crashed runs leave a readable prefix
    }
}

ScenarioRecord read_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_log: cannot open " + path);
    ScenarioRecord rec;
    std::string line;
    int lineno = 0;
    std::size_t n_vehicles = 0;
    double last_t = -std::numeric_limits<double>::infinity();
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw std::runtime_error("read_log: parse error at line " + std::to_string(lineno) +
                                     ": " + e.what());
        }
        try {
            if (lineno == 1) {
                if (j.value("type", "") != "nearmiss-log")
                    throw std::runtime_error("not a nearmiss log header");
                rec.header.config_hash = j.at("config_hash").get<std::string>();
                rec.header.scene_seed = j.at("seed").get<std::uint64_t>();
                rec.header.av_spec = j.at("av").get<std::string>();
                rec.header.bv_spec = j.at("bv").get<std::string>();
                rec.header.dt_phys = j.at("dt_phys").get<double>();
                rec.header.frames_per_step = j.at("frames_per_step").get<int>();
                rec.header.initial = scene_from_json(j.at("init"));
                n_vehicles = rec.header.initial.vehicles.size();
                last_t = rec.header.initial.t;
                continue;
            }
            LogFrame f = frame_from_json(j);
            if (f.vehicles.size() != n_vehicles)
                throw std::runtime_error("vehicle count changed");
            if (!(f.t > last_t)) throw std::runtime_error("time not strictly increasing");
            last_t = f.t;
            if (j.contains("term"))
                rec.termination = termination_from_name(j.at("term").get<std::string>());
            rec.frames.push_back(std::move(f));
        } catch (const std::exception& e) {
            throw std::runtime_error("read_log: schema violation at line " +
                                     std::to_string(lineno) + ": " + e.what());
        }
    }
    if (rec.header.initial.vehicles.empty() && rec.frames.empty())
        throw std::runtime_error("read_log: empty or headerless file " + path);
    return rec;
}

void write_replay_csv(const std::string& path, const ScenarioRecord& record) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_replay_csv: cannot open " + path);
    out << "t,control_step,id,x,y,v,theta,accel,omega,p,delta,n_collisions,d_min,occluded\n";
    char buf[512];
    for (const auto& f : record.frames) {
        for (const auto& v : f.vehicles) {
            const bool occ =
                std::find(f.events.occluding_bv_ids.begin(), f.events.occluding_bv_ids.end(),
                          v.id) != f.events.occluding_bv_ids.end();
            std::snprintf(buf, sizeof(buf),
                          "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%zu,%.17g,%d\n",
                          f.t, f.control_step, v.id, v.x, v.y, v.v, v.theta, v.accel, v.omega,
                          v.p, v.delta, f.events.collisions.size(), f.events.d_min, occ ? 1 : 0);
            out << buf;
        }
    }
}

} // namespace nearmiss
