#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

namespace tggm {

using Vec = std::vector<double>;

// Row-major dense matrix.
struct Matrix {
    int rows = 0;
    int cols = 0;
    Vec data;

    Matrix() = default;
    Matrix(int r, int c, double value = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, value) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

enum class Activation { kRelu, kIdentity };

struct Layer {
    Matrix weight;  // out x in
    Vec bias;       // out
    Activation activation = Activation::kIdentity;

    int input_dim() const { return weight.cols; }
    int output_dim() const { return weight.rows; }
};

// A small fully connected network. The model layer enforces the two-layer
// shape; the math here is generic over the layer count.
struct LayerStack {
    std::vector<Layer> layers;

    int input_dim() const { return layers.front().input_dim(); }
    int output_dim() const { return layers.back().output_dim(); }
    std::size_t parameter_count() const;
};

// Two fully connected layers, ReLU hidden, identity output. Weights are
// uniform(+-sqrt(6/(fan_in+fan_out))), biases zero.
LayerStack make_mlp(int input_dim, int hidden_dim, int output_dim, std::mt19937_64& rng);

// Pre- and post-activation values kept from a forward pass for backprop.
struct ForwardCache {
    Vec input;
    std::vector<Vec> pre;  // per layer, before activation
    std::vector<Vec> out;  // per layer, after activation
};

Vec mlp_forward(const LayerStack& net, std::span<const double> input, ForwardCache* cache = nullptr);

// Gradient buffers with the same layout as the stack's parameters.
struct StackGrads {
    std::vector<Matrix> weight;
    std::vector<Vec> bias;

    void set_zero();
};

StackGrads make_zero_grads(const LayerStack& net);

// Accumulates parameter gradients into `grads` and returns the gradient with
// respect to the input. `cache` must come from a forward pass of `net`.
Vec mlp_backward(const LayerStack& net, const ForwardCache& cache, std::span<const double> upstream,
                 StackGrads& grads);

// Diagonal Gaussian in mean / log-variance form.
struct GaussianParams {
    Vec mean;
    Vec log_var;

    int dim() const { return static_cast<int>(mean.size()); }
};

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

// KL(q || p) for diagonal Gaussians, summed over dimensions. Exactly zero for
// bitwise-equal parameters.
double kl_diag_gaussians(const GaussianParams& q, const GaussianParams& p);

// mean + exp(log_var/2) * noise. Noise is injected so sampling stays testable.
Vec reparameterize(const GaussianParams& g, std::span<const double> noise);

double gaussian_log_likelihood(std::span<const double> x, const GaussianParams& g);

// Max-subtracted, so safe for large logits.
Vec softmax(std::span<const double> logits);

// Log-softmax; used wherever log q would underflow through softmax + log.
Vec log_softmax(std::span<const double> logits);

struct AdamState {
    Vec first_moment;
    Vec second_moment;
    long step_count = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t parameter_count, double learning_rate);
};

// One bias-corrected Adam update, in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

// Central finite differences of `loss` around `params`, compared entry by
// entry against `analytic`. Returns the worst relative error, with the
// denominator floored so near-zero gradients do not blow the ratio up.
double grad_check(const std::function<double(std::span<const double>)>& loss, std::span<const double> params,
                  std::span<const double> analytic, double h);

}  // namespace tggm
