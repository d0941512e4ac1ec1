#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nearmiss/rng.hpp"

namespace nearmiss {

// Dense layer, weights row-major (out x in).
struct Layer {
    int in = 0;
    int out = 0;
    std::vector<double> W;
    std::vector<double> b;
};

Layer make_layer(int in, int out, RngStream& rng); // uniform +-1/sqrt(in)

// Affine layers with rectified-linear hidden activations; final layer affine.
struct MlpParams {
    std::vector<Layer> layers;

    int input_dim() const { return layers.front().in; }
    int output_dim() const { return layers.back().out; }
};

MlpParams make_mlp(const std::vector<int>& sizes, RngStream& rng);

std::vector<double> affine(const Layer& l, const std::vector<double>& x);

std::vector<double> mlp_forward(const MlpParams& params, const std::vector<double>& input);

// Activations cached by a forward pass, consumed by the backward pass.
struct MlpTape {
    std::vector<std::vector<double>> inputs; // input to each layer (post-activation)
    std::vector<std::vector<double>> pre;    // pre-activation output of each layer
};

std::vector<double> mlp_forward_cached(const MlpParams& params,
                                       const std::vector<double>& input, MlpTape& tape);

struct LayerGrads {
    std::vector<double> W;
    std::vector<double> b;
};

struct MlpGrads {
    std::vector<LayerGrads> layers;
};

MlpGrads zero_grads(const MlpParams& params);
void scale_grads(MlpGrads& g, double s);

// Accumulates parameter gradients for one sample and returns dL/d(input).
std::vector<double> mlp_backward(const MlpParams& params, const MlpTape& tape,
                                 const std::vector<double>& grad_out, MlpGrads& grads);

// Adaptive moment estimation with decay constants (0.9, 0.999) and eps 1e-8.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;
};

AdamState make_adam(std::size_t n_params);
void adam_step(std::vector<double*> params, const std::vector<const double*>& grads,
               std::size_t n, AdamState& state, double lr);

// flat parameter access, used by checkpoints, polyak updates and grad checks
std::size_t param_count(const MlpParams& p);
void copy_params_flat(const MlpParams& p, std::vector<double>& out);
void set_params_flat(MlpParams& p, const std::vector<double>& flat);
void flatten_grads(const MlpGrads& g, std::vector<double>& out);

// order-stable FNV hash of the raw parameter bytes
std::uint64_t params_checksum(const MlpParams& p);

// elementwise theta_target = tau * theta + (1 - tau) * theta_target
void polyak_update(const MlpParams& src, MlpParams& target, double tau);

} // namespace nearmiss
