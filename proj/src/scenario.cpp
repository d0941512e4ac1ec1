#include "nearmiss/scenario.hpp"

#include <numeric>

#include "nearmiss/geometry.hpp"
#include "nearmiss/rng.hpp"

namespace nearmiss {

Scene make_initial_scene(const ExperimentConfig& config, std::uint64_t seed) {
    const int n_vehicles = config.n_bv + 1;
    const int capacity = config.start_capacity();
    if (n_vehicles > capacity)
        throw std::invalid_argument(
            "make_initial_scene: capacity error: " + std::to_string(n_vehicles) +
            " vehicles exceed the " + std::to_string(capacity) + "-cell start grid");

    const std::uint64_t pool_index =
        seed % static_cast<std::uint64_t>(config.start_pool.pool_size);
    // everything below depends on the pool index only, so seeds that map to
    // the same layout produce bit-identical scenes
    RngStream rng(mix_seed(0x5ce9a5101ULL, pool_index));

    std::vector<int> cells(static_cast<std::size_t>(capacity));
    std::iota(cells.begin(), cells.end(), 0);
    for (std::size_t i = cells.size() - 1; i > 0; --i)
        std::swap(cells[i], cells[rng.uniform_int(i + 1)]);

    Scene scene;
    scene.t = 0.0;
    scene.road = config.road;
    scene.vehicles.reserve(static_cast<std::size_t>(n_vehicles));
    for (int i = 0; i < n_vehicles; ++i) {
        const int cell = cells[static_cast<std::size_t>(i)];
        const int lane = cell % config.road.n_lanes;
        const int slot = cell / config.road.n_lanes;
        SceneVehicle veh;
        veh.id = i; // index 0 is the AV
        veh.dims = config.dims;
        veh.state.x = config.road.lane_center(lane);
        veh.state.y = config.start_pool.first_slot_y - slot * config.start_pool.slot_spacing +
                      rng.uniform(-config.start_pool.jitter, config.start_pool.jitter);
        veh.state.v = rng.uniform(config.v_bar - 2.0, config.v_bar + 2.0);
        veh.state.theta = -90.0;
        scene.vehicles.push_back(veh);
    }

    for (std::size_t i = 0; i < scene.vehicles.size(); ++i)
        for (std::size_t j = i + 1; j < scene.vehicles.size(); ++j)
            if (obb_overlap(obb_of(scene.vehicles[i].state, scene.vehicles[i].dims),
                            obb_of(scene.vehicles[j].state, scene.vehicles[j].dims)))
                throw std::logic_error("make_initial_scene: start layout produced overlap");
    return scene;
}

ObservationVector encode_observation(const Scene& scene, int vehicle_id,
                                     const ExperimentConfig& config) {
    const int ego_idx = scene.index_of(vehicle_id);
    if (ego_idx < 0)
        throw std::out_of_range("encode_observation: unknown vehicle id " +
                                std::to_string(vehicle_id));
    const VehicleState& ego = scene.vehicles[static_cast<std::size_t>(ego_idx)].state;
    const ObservationConfig& oc = config.obs;

    ObservationVector out;
    out.reserve(static_cast<std::size_t>(5 + 6 * oc.k_obs));
    const double head_off = deg2rad(ego.theta + 90.0);
    out.push_back(ego.v / oc.v_scale);
    out.push_back(std::sin(head_off));
    out.push_back(std::cos(head_off));
    out.push_back((ego.x - scene.road.center_x()) / (0.5 * scene.road.width()));
    out.push_back(ego.omega / oc.omega_scale);

    struct Neighbor {
        double dist;
        int id;
        const VehicleState* state;
    };
    std::vector<Neighbor> neighbors;
    for (const auto& veh : scene.vehicles) {
        if (veh.id == vehicle_id) continue;
        const double d = std::hypot(veh.state.x - ego.x, veh.state.y - ego.y);
        neighbors.push_back({d, veh.id, &veh.state});
    }
    std::sort(neighbors.begin(), neighbors.end(), [](const Neighbor& a, const Neighbor& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        return a.id < b.id;
    });

    const double th = deg2rad(ego.theta);
    const double fx = std::cos(th), fy = std::sin(th);   // forward axis
    const double lx = -std::sin(th), ly = std::cos(th);  // left axis
    for (int slot = 0; slot < oc.k_obs; ++slot) {
        if (slot < static_cast<int>(neighbors.size())) {
            const Neighbor& nb = neighbors[static_cast<std::size_t>(slot)];
            const double dx = nb.state->x - ego.x;
            const double dy = nb.state->y - ego.y;
            const double dtheta = deg2rad(wrap_angle(nb.state->theta - ego.theta));
            out.push_back((dx * lx + dy * ly) / oc.pos_scale); // lateral, ego frame
            out.push_back((dx * fx + dy * fy) / oc.pos_scale); // forward, ego frame
            out.push_back((nb.state->v - ego.v) / oc.v_scale);
            out.push_back(std::sin(dtheta));
            out.push_back(std::cos(dtheta));
            out.push_back(1.0);
        } else {
            for (int k = 0; k < 6; ++k) out.push_back(0.0);
        }
    }
    return out;
}

} // namespace nearmiss
