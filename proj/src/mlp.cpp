#include "nearmiss/mlp.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace nearmiss {

Layer make_layer(int in, int out, RngStream& rng) {
    Layer l;
    l.in = in;
    l.out = out;
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    l.W.resize(static_cast<std::size_t>(in) * static_cast<std::size_t>(out));
    l.b.resize(static_cast<std::size_t>(out));
    for (double& w : l.W) w = rng.uniform(-bound, bound);
    for (double& b : l.b) b = rng.uniform(-bound, bound);
    return l;
}

MlpParams make_mlp(const std::vector<int>& sizes, RngStream& rng) {
    if (sizes.size() < 2) throw std::invalid_argument("make_mlp: need at least two sizes");
    MlpParams p;
    for (std::size_t i = 0; i + 1 < sizes.size(); ++i)
        p.layers.push_back(make_layer(sizes[i], sizes[i + 1], rng));
    return p;
}

std::vector<double> affine(const Layer& l, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != l.in)
        throw std::invalid_argument("affine: input dimension mismatch");
    std::vector<double> y(static_cast<std::size_t>(l.out));
    for (int o = 0; o < l.out; ++o) {
        double acc = l.b[static_cast<std::size_t>(o)];
        const double* row = &l.W[static_cast<std::size_t>(o) * static_cast<std::size_t>(l.in)];
        for (int i = 0; i < l.in; ++i) acc += row[i] * x[static_cast<std::size_t>(i)];
        y[static_cast<std::size_t>(o)] = acc;
    }
    return y;
}

std::vector<double> mlp_forward(const MlpParams& params, const std::vector<double>& input) {
    std::vector<double> x = input;
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        x = affine(params.layers[li], x);
        if (li + 1 < params.layers.size())
            for (double& v : x) v = v > 0.0 ? v : 0.0;
    }
    return x;
}

std::vector<double> mlp_forward_cached(const MlpParams& params,
                                       const std::vector<double>& input, MlpTape& tape) {
    tape.inputs.clear();
    tape.pre.clear();
    std::vector<double> x = input;
    for (std::size_t li = 0; li < params.layers.size(); ++li) {
        tape.inputs.push_back(x);
        x = affine(params.layers[li], x);
        tape.pre.push_back(x);
        if (li + 1 < params.layers.size())
            for (double& v : x) v = v > 0.0 ? v : 0.0;
    }
    return x;
}

MlpGrads zero_grads(const MlpParams& params) {
    MlpGrads g;
    g.layers.resize(params.layers.size());
    for (std::size_t i = 0; i < params.layers.size(); ++i) {
        g.layers[i].W.assign(params.layers[i].W.size(), 0.0);
        g.layers[i].b.assign(params.layers[i].b.size(), 0.0);
    }
    return g;
}

void scale_grads(MlpGrads& g, double s) {
    for (auto& l : g.layers) {
        for (double& v : l.W) v *= s;
        for (double& v : l.b) v *= s;
    }
}

std::vector<double> mlp_backward(const MlpParams& params, const MlpTape& tape,
                                 const std::vector<double>& grad_out, MlpGrads& grads) {
    const std::size_t L = params.layers.size();
    std::vector<double> g = grad_out;
    for (std::size_t li = L; li-- > 0;) {
        const Layer& layer = params.layers[li];
        LayerGrads& lg = grads.layers[li];
        if (li + 1 < L) { // gradient through the rectifier
            for (int o = 0; o < layer.out; ++o)
                if (tape.pre[li][static_cast<std::size_t>(o)] <= 0.0)
                    g[static_cast<std::size_t>(o)] = 0.0;
        }
        const std::vector<double>& x = tape.inputs[li];
        std::vector<double> gin(static_cast<std::size_t>(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double go = g[static_cast<std::size_t>(o)];
            lg.b[static_cast<std::size_t>(o)] += go;
            const std::size_t row = static_cast<std::size_t>(o) * static_cast<std::size_t>(layer.in);
            for (int i = 0; i < layer.in; ++i) {
                lg.W[row + static_cast<std::size_t>(i)] += go * x[static_cast<std::size_t>(i)];
                gin[static_cast<std::size_t>(i)] += go * layer.W[row + static_cast<std::size_t>(i)];
            }
        }
        g = std::move(gin);
    }
    return g;
}

AdamState make_adam(std::size_t n_params) {
    AdamState s;
    s.m.assign(n_params, 0.0);
    s.v.assign(n_params, 0.0);
    return s;
}

void adam_step(std::vector<double*> params, const std::vector<const double*>& grads,
               std::size_t n, AdamState& state, double lr) {
    constexpr double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    if (state.m.size() != n) throw std::invalid_argument("adam_step: state size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < n; ++i) {
        const double g = *grads[i];
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        *params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

std::size_t param_count(const MlpParams& p) {
    std::size_t n = 0;
    for (const auto& l : p.layers) n += l.W.size() + l.b.size();
    return n;
}

void copy_params_flat(const MlpParams& p, std::vector<double>& out) {
    out.clear();
    out.reserve(param_count(p));
    for (const auto& l : p.layers) {
        out.insert(out.end(), l.W.begin(), l.W.end());
        out.insert(out.end(), l.b.begin(), l.b.end());
    }
}

void set_params_flat(MlpParams& p, const std::vector<double>& flat) {
    if (flat.size() != param_count(p))
        throw std::invalid_argument("set_params_flat: length mismatch");
    std::size_t k = 0;
    for (auto& l : p.layers) {
        for (double& w : l.W) w = flat[k++];
        for (double& b : l.b) b = flat[k++];
    }
}

void flatten_grads(const MlpGrads& g, std::vector<double>& out) {
    out.clear();
    for (const auto& l : g.layers) {
        out.insert(out.end(), l.W.begin(), l.W.end());
        out.insert(out.end(), l.b.begin(), l.b.end());
    }
}

std::uint64_t params_checksum(const MlpParams& p) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& l : p.layers) {
        for (double w : l.W) mix(w);
        for (double b : l.b) mix(b);
    }
    return h;
}

void polyak_update(const MlpParams& src, MlpParams& target, double tau) {
    if (src.layers.size() != target.layers.size())
        throw std::invalid_argument("polyak_update: shape mismatch");
    for (std::size_t li = 0; li < src.layers.size(); ++li) {
        const Layer& s = src.layers[li];
        Layer& t = target.layers[li];
        if (s.W.size() != t.W.size() || s.b.size() != t.b.size())
            throw std::invalid_argument("polyak_update: shape mismatch");
        for (std::size_t i = 0; i < s.W.size(); ++i)
            t.W[i] = tau * s.W[i] + (1.0 - tau) * t.W[i];
        for (std::size_t i = 0; i < s.b.size(); ++i)
            t.b[i] = tau * s.b[i] + (1.0 - tau) * t.b[i];
    }
}

} // namespace nearmiss
