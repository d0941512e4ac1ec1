#include "nearmiss/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace nearmiss {

namespace {

void add_mlp_tensors(Checkpoint& ckpt, const std::string& prefix, const MlpParams& mlp) {
    for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
        const Layer& l = mlp.layers[li];
        const std::string base = prefix + ".l" + std::to_string(li);
        ckpt.tensors.push_back({base + ".W", {l.out, l.in}, l.W});
        ckpt.tensors.push_back({base + ".b", {l.out}, l.b});
    }
}

const Checkpoint::Tensor& find_tensor(const Checkpoint& ckpt, const std::string& name) {
    for (const auto& t : ckpt.tensors)
        if (t.name == name) return t;
    throw CheckpointError(CheckpointErrorCode::parse, "checkpoint: missing tensor " + name);
}

void read_mlp_tensors(const Checkpoint& ckpt, const std::string& prefix, MlpParams& mlp) {
    for (std::size_t li = 0; li < mlp.layers.size(); ++li) {
        Layer& l = mlp.layers[li];
        const std::string base = prefix + ".l" + std::to_string(li);
        const auto& w = find_tensor(ckpt, base + ".W");
        const auto& b = find_tensor(ckpt, base + ".b");
        if (w.shape != std::vector<int>{l.out, l.in} || b.shape != std::vector<int>{l.out})
            throw CheckpointError(CheckpointErrorCode::parse,
                                  "checkpoint: tensor shape mismatch at " + base);
        l.W = w.data;
        l.b = b.data;
    }
}

// count of layers stored under a prefix, used to rebuild nets from scratch
MlpParams mlp_from_tensors(const Checkpoint& ckpt, const std::string& prefix) {
    MlpParams mlp;
    for (std::size_t li = 0;; ++li) {
        const std::string base = prefix + ".l" + std::to_string(li);
        const Checkpoint::Tensor* w = nullptr;
        for (const auto& t : ckpt.tensors)
            if (t.name == base + ".W") w = &t;
        if (!w) break;
        const auto& b = find_tensor(ckpt, base + ".b");
        Layer l;
        l.out = w->shape.at(0);
        l.in = w->shape.at(1);
        l.W = w->data;
        l.b = b.data;
        mlp.layers.push_back(std::move(l));
    }
    if (mlp.layers.empty())
        throw CheckpointError(CheckpointErrorCode::parse,
                              "checkpoint: no tensors under " + prefix);
    return mlp;
}

} // namespace

Checkpoint checkpoint_from_sac(const SacState& sac, AgentRole role, int round,
                               const std::string& config_hash) {
    Checkpoint c;
    c.role = role;
    c.round = round;
    c.config_hash = config_hash;
    add_mlp_tensors(c, "actor.net", sac.actor.net);
    add_mlp_tensors(c, "q1", sac.q1);
    add_mlp_tensors(c, "q2", sac.q2);
    add_mlp_tensors(c, "q1_target", sac.q1_target);
    add_mlp_tensors(c, "q2_target", sac.q2_target);
    return c;
}

void apply_checkpoint(SacState& dst, const Checkpoint& ckpt) {
    read_mlp_tensors(ckpt, "actor.net", dst.actor.net);
    read_mlp_tensors(ckpt, "q1", dst.q1);
    read_mlp_tensors(ckpt, "q2", dst.q2);
    read_mlp_tensors(ckpt, "q1_target", dst.q1_target);
    read_mlp_tensors(ckpt, "q2_target", dst.q2_target);
}

std::shared_ptr<const ActorParams> actor_from_checkpoint(const Checkpoint& ckpt) {
    auto actor = std::make_shared<ActorParams>();
    actor->net = mlp_from_tensors(ckpt, "actor.net");
    return actor;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp);
        if (!out) throw std::runtime_error("save_checkpoint: cannot open " + tmp);
        out << "nearmiss-checkpoint version=" << ckpt.format_version << "\n";
        out << "role=" << role_name(ckpt.role) << "\n";
        out << "round=" << ckpt.round << "\n";
        out << "config_hash=" << ckpt.config_hash << "\n";
        out << "rng_state=" << (ckpt.rng_state.empty() ? "-" : ckpt.rng_state) << "\n";
        char buf[64];
        for (const auto& t : ckpt.tensors) {
            out << "tensor " << t.name;
            for (int d : t.shape) out << " " << d;
            out << "\n";
            for (std::size_t i = 0; i < t.data.size(); ++i) {
                std::snprintf(buf, sizeof(buf), "%a", t.data[i]); // lossless hex floats
                out << (i ? " " : "") << buf;
            }
            out << "\n";
        }
        out << "end\n";
        if (!out) throw std::runtime_error("save_checkpoint: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("save_checkpoint: cannot move into place: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path);
    Checkpoint c;
    std::string line;

    if (!std::getline(in, line))
        throw CheckpointError(CheckpointErrorCode::truncated, "checkpoint: empty file " + path);
    int version = -1;
    if (std::sscanf(line.c_str(), "nearmiss-checkpoint version=%d", &version) != 1)
        throw CheckpointError(CheckpointErrorCode::parse,
                              "checkpoint: bad magic line in " + path);
    if (version != 1)
        throw CheckpointError(CheckpointErrorCode::version_mismatch,
                              "checkpoint: unsupported format version " +
                                  std::to_string(version) + " in " + path);
    c.format_version = version;

    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line == "end") {
            saw_end = true;
            break;
        }
        if (line.rfind("role=", 0) == 0) {
            const std::string v = line.substr(5);
            if (v != "AV" && v != "BV")
                throw CheckpointError(CheckpointErrorCode::parse, "checkpoint: bad role " + v);
            c.role = v == "AV" ? AgentRole::AV : AgentRole::BV;
        } else if (line.rfind("round=", 0) == 0) {
            c.round = std::stoi(line.substr(6));
        } else if (line.rfind("config_hash=", 0) == 0) {
            c.config_hash = line.substr(12);
        } else if (line.rfind("rng_state=", 0) == 0) {
            const std::string v = line.substr(10);
            c.rng_state = v == "-" ? "" : v;
        } else if (line.rfind("tensor ", 0) == 0) {
            std::istringstream hs(line.substr(7));
            Checkpoint::Tensor t;
            hs >> t.name;
            int d;
            while (hs >> d) t.shape.push_back(d);
            if (t.name.empty() || t.shape.empty())
                throw CheckpointError(CheckpointErrorCode::parse,
                                      "checkpoint: bad tensor header: " + line);
            std::size_t count = 1;
            for (int dim : t.shape) count *= static_cast<std::size_t>(dim);
            if (!std::getline(in, line))
                throw CheckpointError(CheckpointErrorCode::truncated,
                                      "checkpoint: missing data for tensor " + t.name);
            const char* p = line.c_str();
            char* endp = nullptr;
            t.data.reserve(count);
            for (std::size_t i = 0; i < count; ++i) {
                const double v = std::strtod(p, &endp);
                if (endp == p)
                    throw CheckpointError(CheckpointErrorCode::truncated,
                                          "checkpoint: short data line for tensor " + t.name);
                t.data.push_back(v);
                p = endp;
            }
            while (*p == ' ') ++p;
            if (*p != '\0')
                throw CheckpointError(CheckpointErrorCode::parse,
                                      "checkpoint: trailing data for tensor " + t.name);
            c.tensors.push_back(std::move(t));
        } else {
            throw CheckpointError(CheckpointErrorCode::parse,
                                  "checkpoint: unrecognized line: " + line);
        }
    }
    if (!saw_end)
        throw CheckpointError(CheckpointErrorCode::truncated,
                              "checkpoint: truncated file (no end marker): " + path);
    return c;
}

Checkpoint load_checkpoint_checked(const std::string& path, const std::string& expected_hash,
                                   bool force) {
    Checkpoint c = load_checkpoint(path);
    if (!expected_hash.empty() && c.config_hash != expected_hash && !force)
        throw CheckpointError(CheckpointErrorCode::hash_mismatch,
                              "checkpoint: config hash mismatch for " + path + " (file " +
                                  c.config_hash + ", expected " + expected_hash +
                                  "); pass --force to override");
    return c;
}

std::shared_ptr<const ActorParams> load_actor_file(const std::string& path,
                                                   const std::string& expected_hash,
                                                   bool force) {
    return actor_from_checkpoint(load_checkpoint_checked(path, expected_hash, force));
}

} // namespace nearmiss
