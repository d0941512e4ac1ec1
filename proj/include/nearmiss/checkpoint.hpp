#pragma once

#include <memory>
#include <string>
#include <vector>

#include "nearmiss/sac.hpp"

namespace nearmiss {

enum class CheckpointErrorCode { version_mismatch, hash_mismatch, truncated, parse };

class CheckpointError : public std::runtime_error {
public:
    CheckpointError(CheckpointErrorCode code, const std::string& msg)
        : std::runtime_error(msg), code(code) {}
    CheckpointErrorCode code;
};

// Lossless text checkpoint: metadata plus named tensors (shape manifest and
// flat hex-float arrays). Saving is canonical, so save-load-save is
// byte-identical.
struct Checkpoint {
    int format_version = 1;
    AgentRole role = AgentRole::AV;
    int round = 0;
    std::string config_hash;
    std::string rng_state; // optional; empty means absent

    struct Tensor {
        std::string name;
        std::vector<int> shape;
        std::vector<double> data;
    };
    std::vector<Tensor> tensors;
};

Checkpoint checkpoint_from_sac(const SacState& sac, AgentRole role, int round,
                               const std::string& config_hash);

// Overwrites the parameters of an existing, shape-compatible SacState.
void apply_checkpoint(SacState& dst, const Checkpoint& ckpt);

// Actor network alone, for evaluation-time policies.
std::shared_ptr<const ActorParams> actor_from_checkpoint(const Checkpoint& ckpt);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// Refuses a config-hash mismatch unless force is set. An empty expected hash
// skips the check.
Checkpoint load_checkpoint_checked(const std::string& path, const std::string& expected_hash,
                                   bool force);

std::shared_ptr<const ActorParams> load_actor_file(const std::string& path,
                                                   const std::string& expected_hash = "",
                                                   bool force = false);

} // namespace nearmiss
