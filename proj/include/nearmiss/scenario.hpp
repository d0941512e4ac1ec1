#pragma once

#include <cstdint>

#include "nearmiss/config.hpp"
#include "nearmiss/types.hpp"

namespace nearmiss {

// Builds the initial scene for layout (seed mod pool_size). All headings are
// -90, speeds are drawn from [v_bar - 2, v_bar + 2], and vehicles occupy
// distinct (lane, slot) grid cells with jittered longitudinal offsets, so no
// two bounding boxes overlap. Deterministic per pool index. Throws when the
// grid cannot hold n_bv + 1 vehicles.
Scene make_initial_scene(const ExperimentConfig& config, std::uint64_t seed);

// Fixed-length ego-frame feature vector: 5 ego entries followed by k_obs
// neighbor slots of 6 entries each, nearest neighbor first (ties broken by
// lower id); absent slots are zero with presence flag 0. Throws on unknown id.
ObservationVector encode_observation(const Scene& scene, int vehicle_id,
                                     const ExperimentConfig& config);

inline int observation_dim(const ExperimentConfig& config) {
    return 5 + 6 * config.obs.k_obs;
}

} // namespace nearmiss
