#include "tggm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tggm {

std::size_t LayerStack::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.weight.data.size() + layer.bias.size();
    }
    return n;
}

LayerStack make_mlp(int input_dim, int hidden_dim, int output_dim, std::mt19937_64& rng) {
    if (input_dim <= 0 || hidden_dim <= 0 || output_dim <= 0) {
        throw std::invalid_argument("make_mlp: dimensions must be positive");
    }
    auto init_layer = [&rng](int in, int out, Activation act) {
        Layer layer;
        layer.weight = Matrix(out, in);
        layer.bias.assign(out, 0.0);
        layer.activation = act;
        const double bound = std::sqrt(6.0 / (in + out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (double& w : layer.weight.data) {
            w = dist(rng);
        }
        return layer;
    };
    LayerStack net;
    net.layers.push_back(init_layer(input_dim, hidden_dim, Activation::kRelu));
    net.layers.push_back(init_layer(hidden_dim, output_dim, Activation::kIdentity));
    return net;
}

namespace {

void affine(const Layer& layer, std::span<const double> input, Vec& pre) {
    const int out = layer.output_dim();
    const int in = layer.input_dim();
    pre.assign(out, 0.0);
    const double* w = layer.weight.data.data();
    for (int r = 0; r < out; ++r) {
        double acc = layer.bias[r];
        const double* row = w + static_cast<std::size_t>(r) * in;
        for (int c = 0; c < in; ++c) {
            acc += row[c] * input[c];
        }
        pre[r] = acc;
    }
}

void apply_activation(Activation act, const Vec& pre, Vec& out) {
    out = pre;
    if (act == Activation::kRelu) {
        for (double& v : out) {
            v = v > 0.0 ? v : 0.0;
        }
    }
}

}  // namespace

Vec mlp_forward(const LayerStack& net, std::span<const double> input, ForwardCache* cache) {
    if (net.layers.empty()) {
        throw std::invalid_argument("mlp_forward: empty network");
    }
    if (static_cast<int>(input.size()) != net.input_dim()) {
        throw std::invalid_argument("mlp_forward: input length does not match network input_dim");
    }
    if (cache != nullptr) {
        cache->input.assign(input.begin(), input.end());
        cache->pre.assign(net.layers.size(), {});
        cache->out.assign(net.layers.size(), {});
    }
    Vec current(input.begin(), input.end());
    Vec pre;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const Layer& layer = net.layers[k];
        if (static_cast<int>(current.size()) != layer.input_dim()) {
            throw std::invalid_argument("mlp_forward: layer dimensions do not chain");
        }
        affine(layer, current, pre);
        apply_activation(layer.activation, pre, current);
        if (cache != nullptr) {
            cache->pre[k] = pre;
            cache->out[k] = current;
        }
    }
    return current;
}

void StackGrads::set_zero() {
    for (auto& w : weight) {
        std::fill(w.data.begin(), w.data.end(), 0.0);
    }
    for (auto& b : bias) {
        std::fill(b.begin(), b.end(), 0.0);
    }
}

StackGrads make_zero_grads(const LayerStack& net) {
    StackGrads grads;
    for (const auto& layer : net.layers) {
        grads.weight.emplace_back(layer.output_dim(), layer.input_dim());
        grads.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return grads;
}

Vec mlp_backward(const LayerStack& net, const ForwardCache& cache, std::span<const double> upstream,
                 StackGrads& grads) {
    const std::size_t n_layers = net.layers.size();
    if (cache.pre.size() != n_layers || cache.out.size() != n_layers ||
        static_cast<int>(cache.input.size()) != net.input_dim()) {
        throw std::invalid_argument("mlp_backward: cache does not match network");
    }
    if (static_cast<int>(upstream.size()) != net.output_dim()) {
        throw std::invalid_argument("mlp_backward: upstream length does not match output_dim");
    }
    if (grads.weight.size() != n_layers || grads.bias.size() != n_layers) {
        throw std::invalid_argument("mlp_backward: gradient layout does not match network");
    }

    Vec delta(upstream.begin(), upstream.end());
    for (std::size_t k = n_layers; k-- > 0;) {
        const Layer& layer = net.layers[k];
        const Vec& pre = cache.pre[k];
        if (pre.size() != static_cast<std::size_t>(layer.output_dim())) {
            throw std::invalid_argument("mlp_backward: cache layer shape mismatch");
        }
        if (layer.activation == Activation::kRelu) {
            for (std::size_t i = 0; i < delta.size(); ++i) {
                if (pre[i] <= 0.0) {
                    delta[i] = 0.0;
                }
            }
        }
        const Vec& layer_input = (k == 0) ? cache.input : cache.out[k - 1];
        Matrix& dw = grads.weight[k];
        Vec& db = grads.bias[k];
        const int out = layer.output_dim();
        const int in = layer.input_dim();
        for (int r = 0; r < out; ++r) {
            const double d = delta[r];
            db[r] += d;
            double* dw_row = dw.data.data() + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) {
                dw_row[c] += d * layer_input[c];
            }
        }
        // input gradient: W^T * delta
        Vec next(in, 0.0);
        const double* w = layer.weight.data.data();
        for (int r = 0; r < out; ++r) {
            const double d = delta[r];
            const double* row = w + static_cast<std::size_t>(r) * in;
            for (int c = 0; c < in; ++c) {
                next[c] += row[c] * d;
            }
        }
        delta = std::move(next);
    }
    return delta;
}

double kl_diag_gaussians(const GaussianParams& q, const GaussianParams& p) {
    if (q.dim() != p.dim()) {
        throw std::invalid_argument("kl_diag_gaussians: dimension mismatch");
    }
    double total = 0.0;
    for (int i = 0; i < q.dim(); ++i) {
        const double diff = q.mean[i] - p.mean[i];
        // exp of the difference keeps KL(q, q) exactly zero
        const double ratio = std::exp(q.log_var[i] - p.log_var[i]);
        total += 0.5 * (p.log_var[i] - q.log_var[i] + ratio + diff * diff * std::exp(-p.log_var[i]) - 1.0);
    }
    return total;
}

Vec reparameterize(const GaussianParams& g, std::span<const double> noise) {
    if (static_cast<int>(noise.size()) != g.dim()) {
        throw std::invalid_argument("reparameterize: noise dimension mismatch");
    }
    Vec z(g.dim());
    for (int i = 0; i < g.dim(); ++i) {
        z[i] = g.mean[i] + std::exp(0.5 * g.log_var[i]) * noise[i];
    }
    return z;
}

double gaussian_log_likelihood(std::span<const double> x, const GaussianParams& g) {
    if (static_cast<int>(x.size()) != g.dim()) {
        throw std::invalid_argument("gaussian_log_likelihood: dimension mismatch");
    }
    constexpr double kLog2Pi = 1.8378770664093454836;
    double total = 0.0;
    for (int i = 0; i < g.dim(); ++i) {
        const double diff = x[i] - g.mean[i];
        total += -0.5 * kLog2Pi - 0.5 * g.log_var[i] - 0.5 * diff * diff * std::exp(-g.log_var[i]);
    }
    return total;
}

Vec softmax(std::span<const double> logits) {
    Vec out = log_softmax(logits);
    for (double& v : out) {
        v = std::exp(v);
    }
    return out;
}

Vec log_softmax(std::span<const double> logits) {
    if (logits.empty()) {
        throw std::invalid_argument("softmax: empty logits");
    }
    const double m = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double v : logits) {
        sum += std::exp(v - m);
    }
    const double lse = m + std::log(sum);
    Vec out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = logits[i] - lse;
    }
    return out;
}

AdamState::AdamState(std::size_t parameter_count, double learning_rate)
    : first_moment(parameter_count, 0.0), second_moment(parameter_count, 0.0), lr(learning_rate) {}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw std::invalid_argument("adam_step: parameter / gradient / moment layout mismatch");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(state.beta1, t);
    const double bc2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.first_moment[i] = state.beta1 * state.first_moment[i] + (1.0 - state.beta1) * g;
        state.second_moment[i] = state.beta2 * state.second_moment[i] + (1.0 - state.beta2) * g * g;
        const double m_hat = state.first_moment[i] / bc1;
        const double v_hat = state.second_moment[i] / bc2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

double grad_check(const std::function<double(std::span<const double>)>& loss, std::span<const double> params,
                  std::span<const double> analytic, double h) {
    if (params.size() != analytic.size()) {
        throw std::invalid_argument("grad_check: analytic gradient layout mismatch");
    }
    Vec work(params.begin(), params.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < work.size(); ++i) {
        const double saved = work[i];
        work[i] = saved + h;
        const double up = loss(work);
        work[i] = saved - h;
        const double down = loss(work);
        work[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-4});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
    return worst;
}

}  // namespace tggm
