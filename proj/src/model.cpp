#include "tggm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace tggm {

namespace {

Vec one_hot(int y) {
    Vec v(kCategories, 0.0);
    v[y] = 1.0;
    return v;
}

void check_category(int y) {
    if (y < 0 || y >= kCategories) {
        throw std::invalid_argument("category must be 0 or 1");
    }
}

struct ClampedGaussian {
    GaussianParams g;
    std::vector<unsigned char> lv_free;  // 1 where the raw log-variance was inside the clamp
};

ClampedGaussian split_head(std::span<const double> raw, double lo, double hi) {
    const int d = static_cast<int>(raw.size()) / 2;
    ClampedGaussian out;
    out.g.mean.assign(raw.begin(), raw.begin() + d);
    out.g.log_var.resize(d);
    out.lv_free.resize(d);
    for (int i = 0; i < d; ++i) {
        const double v = raw[d + i];
        out.lv_free[i] = (v > lo && v < hi) ? 1 : 0;
        out.g.log_var[i] = std::clamp(v, lo, hi);
    }
    return out;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Everything one mixture component contributes to an ELBO, with the caches
// needed to backpropagate through it.
struct ComponentPass {
    ForwardCache inf_cache;
    ForwardCache prior_cache;
    ForwardCache gen_cache;
    ClampedGaussian q_z;  // q(z | x, y)
    ClampedGaussian p_z;  // p(z | y)
    Vec z;
    Vec mu_x;                          // squashed pixel means
    Vec lv_x;                          // clamped pixel log-variances
    std::vector<unsigned char> lvx_free;
    double rec = 0.0;                  // log p(x | z, y)
    double kl_z = 0.0;                 // KL[q(z|x,y) || p(z|y)]
};

ComponentPass run_component(const TggmModel& m, std::span<const double> x, int y,
                            std::span<const double> noise) {
    if (static_cast<int>(noise.size()) != m.latent_dim) {
        throw std::invalid_argument("elbo: noise dimension does not match latent_dim");
    }
    ComponentPass pass;

    Vec inf_input(x.begin(), x.end());
    const Vec onehot = one_hot(y);
    inf_input.insert(inf_input.end(), onehot.begin(), onehot.end());
    const Vec inf_raw = mlp_forward(m.f_inf, inf_input, &pass.inf_cache);
    pass.q_z = split_head(inf_raw, kLogVarMin, kLogVarMax);

    const Vec prior_raw = mlp_forward(m.f_prior, onehot, &pass.prior_cache);
    pass.p_z = split_head(prior_raw, kLogVarMin, kLogVarMax);

    pass.z = reparameterize(pass.q_z.g, noise);

    const Vec gen_raw = mlp_forward(m.f_gen, pass.z, &pass.gen_cache);
    const int p = m.patch_dim;
    pass.mu_x.resize(p);
    pass.lv_x.resize(p);
    pass.lvx_free.resize(p);
    for (int i = 0; i < p; ++i) {
        pass.mu_x[i] = sigmoid(gen_raw[i]);
        const double lv = gen_raw[p + i];
        pass.lvx_free[i] = (lv > kPixelLogVarMin && lv < kLogVarMax) ? 1 : 0;
        pass.lv_x[i] = std::clamp(lv, kPixelLogVarMin, kLogVarMax);
    }

    GaussianParams px{pass.mu_x, pass.lv_x};
    pass.rec = gaussian_log_likelihood(x, px);
    pass.kl_z = kl_diag_gaussians(pass.q_z.g, pass.p_z.g);
    return pass;
}

// Accumulates scale * d(rec - kl_z)/d(theta) for one component. `scale`
// already carries the mixture weight where one applies.
void backprop_component(const TggmModel& m, std::span<const double> x, std::span<const double> noise,
                        const ComponentPass& pass, double scale, TggmGrads& grads) {
    const int p = m.patch_dim;
    const int d = m.latent_dim;

    // reconstruction upstream on the raw generator head
    Vec gen_up(2 * p);
    for (int i = 0; i < p; ++i) {
        const double diff = x[i] - pass.mu_x[i];
        const double inv_var = std::exp(-pass.lv_x[i]);
        const double dmu = diff * inv_var;
        gen_up[i] = scale * dmu * pass.mu_x[i] * (1.0 - pass.mu_x[i]);
        gen_up[p + i] =
            pass.lvx_free[i] ? scale * (-0.5 + 0.5 * diff * diff * inv_var) : 0.0;
    }
    const Vec dz = mlp_backward(m.f_gen, pass.gen_cache, gen_up, grads.f_gen);

    // z = mu + exp(lv/2) * eps, plus the -KL contributions
    Vec inf_up(2 * d);
    Vec prior_up(2 * d);
    for (int i = 0; i < d; ++i) {
        const double mu_q = pass.q_z.g.mean[i];
        const double lv_q = pass.q_z.g.log_var[i];
        const double mu_p = pass.p_z.g.mean[i];
        const double lv_p = pass.p_z.g.log_var[i];
        const double diff = mu_q - mu_p;
        const double inv_var_p = std::exp(-lv_p);

        inf_up[i] = dz[i] - scale * diff * inv_var_p;
        double dlv_q = dz[i] * 0.5 * std::exp(0.5 * lv_q) * noise[i] -
                       scale * 0.5 * (std::exp(lv_q - lv_p) - 1.0);
        inf_up[d + i] = pass.q_z.lv_free[i] ? dlv_q : 0.0;

        prior_up[i] = scale * diff * inv_var_p;
        const double dlv_p = -scale * 0.5 * (1.0 - (std::exp(lv_q) + diff * diff) * inv_var_p);
        prior_up[d + i] = pass.p_z.lv_free[i] ? dlv_p : 0.0;
    }
    mlp_backward(m.f_inf, pass.inf_cache, inf_up, grads.f_inf);
    mlp_backward(m.f_prior, pass.prior_cache, prior_up, grads.f_prior);
}

void check_patch(const TggmModel& m, std::span<const double> x) {
    if (static_cast<int>(x.size()) != m.patch_dim) {
        throw std::invalid_argument("patch length does not match patch_dim");
    }
}

}  // namespace

TggmModel make_model(int patch_dim, int latent_dim, int hidden_width, std::uint64_t seed) {
    if (patch_dim <= 0 || latent_dim <= 0 || hidden_width <= 0) {
        throw std::invalid_argument("make_model: dimensions must be positive");
    }
    std::mt19937_64 rng(seed);
    TggmModel m;
    m.patch_dim = patch_dim;
    m.latent_dim = latent_dim;
    m.f_inf = make_mlp(patch_dim + kCategories, hidden_width, 2 * latent_dim, rng);
    m.f_cls = make_mlp(patch_dim, hidden_width, kCategories, rng);
    m.f_prior = make_mlp(kCategories, hidden_width, 2 * latent_dim, rng);
    m.f_gen = make_mlp(latent_dim, hidden_width, 2 * patch_dim, rng);
    m.prior_y.assign(kCategories, 1.0 / kCategories);
    return m;
}

void validate_model(const TggmModel& m) {
    auto check_net = [](const LayerStack& net, int in, int out, const char* name) {
        if (net.layers.size() != 2) {
            throw std::invalid_argument(std::string(name) + ": expected exactly two layers");
        }
        if (net.input_dim() != in || net.output_dim() != out) {
            throw std::invalid_argument(std::string(name) + ": dimensions do not match the model");
        }
        if (net.layers[0].output_dim() != net.layers[1].input_dim()) {
            throw std::invalid_argument(std::string(name) + ": layer dimensions do not chain");
        }
    };
    check_net(m.f_inf, m.patch_dim + kCategories, 2 * m.latent_dim, "f_inf");
    check_net(m.f_cls, m.patch_dim, kCategories, "f_cls");
    check_net(m.f_prior, kCategories, 2 * m.latent_dim, "f_prior");
    check_net(m.f_gen, m.latent_dim, 2 * m.patch_dim, "f_gen");
    if (m.prior_y.size() != kCategories) {
        throw std::invalid_argument("prior_y must have length 2");
    }
    double sum = 0.0;
    for (double v : m.prior_y) {
        if (v <= 0.0) {
            throw std::invalid_argument("prior_y entries must be positive");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("prior_y must sum to 1");
    }
}

void TggmGrads::set_zero() {
    f_inf.set_zero();
    f_cls.set_zero();
    f_prior.set_zero();
    f_gen.set_zero();
}

TggmGrads make_zero_grads(const TggmModel& m) {
    return TggmGrads{make_zero_grads(m.f_inf), make_zero_grads(m.f_cls), make_zero_grads(m.f_prior),
                     make_zero_grads(m.f_gen)};
}

std::size_t parameter_count(const TggmModel& m) {
    return m.f_inf.parameter_count() + m.f_cls.parameter_count() + m.f_prior.parameter_count() +
           m.f_gen.parameter_count();
}

namespace {

void append_stack(const LayerStack& net, Vec& out) {
    for (const auto& layer : net.layers) {
        out.insert(out.end(), layer.weight.data.begin(), layer.weight.data.end());
        out.insert(out.end(), layer.bias.begin(), layer.bias.end());
    }
}

void append_stack_grads(const StackGrads& g, Vec& out) {
    for (std::size_t k = 0; k < g.weight.size(); ++k) {
        out.insert(out.end(), g.weight[k].data.begin(), g.weight[k].data.end());
        out.insert(out.end(), g.bias[k].begin(), g.bias[k].end());
    }
}

std::size_t read_stack(LayerStack& net, std::span<const double> flat, std::size_t pos) {
    for (auto& layer : net.layers) {
        std::copy(flat.begin() + pos, flat.begin() + pos + layer.weight.data.size(), layer.weight.data.begin());
        pos += layer.weight.data.size();
        std::copy(flat.begin() + pos, flat.begin() + pos + layer.bias.size(), layer.bias.begin());
        pos += layer.bias.size();
    }
    return pos;
}

}  // namespace

Vec flatten_params(const TggmModel& m) {
    Vec out;
    out.reserve(parameter_count(m));
    append_stack(m.f_inf, out);
    append_stack(m.f_cls, out);
    append_stack(m.f_prior, out);
    append_stack(m.f_gen, out);
    return out;
}

void unflatten_params(TggmModel& m, std::span<const double> flat) {
    if (flat.size() != parameter_count(m)) {
        throw std::invalid_argument("unflatten_params: flat vector has wrong length");
    }
    std::size_t pos = 0;
    pos = read_stack(m.f_inf, flat, pos);
    pos = read_stack(m.f_cls, flat, pos);
    pos = read_stack(m.f_prior, flat, pos);
    read_stack(m.f_gen, flat, pos);
}

Vec flatten_grads(const TggmModel& m, const TggmGrads& g) {
    Vec out;
    out.reserve(parameter_count(m));
    append_stack_grads(g.f_inf, out);
    append_stack_grads(g.f_cls, out);
    append_stack_grads(g.f_prior, out);
    append_stack_grads(g.f_gen, out);
    return out;
}

GaussianParams infer_posterior(const TggmModel& m, std::span<const double> x, int y) {
    check_patch(m, x);
    check_category(y);
    Vec input(x.begin(), x.end());
    const Vec onehot = one_hot(y);
    input.insert(input.end(), onehot.begin(), onehot.end());
    return split_head(mlp_forward(m.f_inf, input), kLogVarMin, kLogVarMax).g;
}

Vec classify(const TggmModel& m, std::span<const double> x) {
    check_patch(m, x);
    return softmax(mlp_forward(m.f_cls, x));
}

GaussianParams prior_component(const TggmModel& m, int y) {
    check_category(y);
    return split_head(mlp_forward(m.f_prior, one_hot(y)), kLogVarMin, kLogVarMax).g;
}

GaussianParams decode(const TggmModel& m, std::span<const double> z) {
    if (static_cast<int>(z.size()) != m.latent_dim) {
        throw std::invalid_argument("decode: z length does not match latent_dim");
    }
    const Vec raw = mlp_forward(m.f_gen, z);
    const int p = m.patch_dim;
    GaussianParams g;
    g.mean.resize(p);
    g.log_var.resize(p);
    for (int i = 0; i < p; ++i) {
        g.mean[i] = sigmoid(raw[i]);
        g.log_var[i] = std::clamp(raw[p + i], kPixelLogVarMin, kLogVarMax);
    }
    return g;
}

MixturePosterior mixture_posterior(const TggmModel& m, std::span<const double> x) {
    MixturePosterior mp;
    const Vec q = classify(m, x);
    for (int y = 0; y < kCategories; ++y) {
        mp.weights[y] = q[y];
        mp.components[y] = infer_posterior(m, x, y);
    }
    return mp;
}

Vec generate(const TggmModel& m, int y, std::span<const double> noise_z, std::span<const double> noise_x) {
    check_category(y);
    const Vec z = reparameterize(prior_component(m, y), noise_z);
    const GaussianParams px = decode(m, z);
    if (static_cast<int>(noise_x.size()) != m.patch_dim) {
        throw std::invalid_argument("generate: noise_x length does not match patch_dim");
    }
    Vec patch(m.patch_dim);
    for (int i = 0; i < m.patch_dim; ++i) {
        patch[i] = std::clamp(px.mean[i] + std::exp(0.5 * px.log_var[i]) * noise_x[i], 0.0, 1.0);
    }
    return patch;
}

ElboBreakdown elbo_unlabeled(const TggmModel& m, std::span<const double> x, const ComponentNoise& noise,
                             TggmGrads* grads, double grad_scale) {
    check_patch(m, x);

    ForwardCache cls_cache;
    const Vec logits = mlp_forward(m.f_cls, x, &cls_cache);
    const Vec log_q = log_softmax(logits);
    Vec q(kCategories);
    for (int y = 0; y < kCategories; ++y) {
        q[y] = std::exp(log_q[y]);
    }

    std::array<ComponentPass, kCategories> passes;
    ElboBreakdown elbo;
    for (int y = 0; y < kCategories; ++y) {
        passes[y] = run_component(m, x, y, noise[y]);
        elbo.reconstruction += q[y] * passes[y].rec;
        elbo.kl_z += q[y] * passes[y].kl_z;
        elbo.kl_y += q[y] * (log_q[y] - std::log(m.prior_y[y]));
    }
    elbo.total = elbo.reconstruction - elbo.kl_z - elbo.kl_y;

    if (grads != nullptr) {
        // d(total)/dq_y, with q held out of the component passes
        Vec s(kCategories);
        double mean_s = 0.0;
        for (int y = 0; y < kCategories; ++y) {
            s[y] = passes[y].rec - passes[y].kl_z - (log_q[y] - std::log(m.prior_y[y]) + 1.0);
            mean_s += q[y] * s[y];
        }
        Vec cls_up(kCategories);
        for (int y = 0; y < kCategories; ++y) {
            cls_up[y] = grad_scale * q[y] * (s[y] - mean_s);
        }
        mlp_backward(m.f_cls, cls_cache, cls_up, grads->f_cls);
        for (int y = 0; y < kCategories; ++y) {
            backprop_component(m, x, noise[y], passes[y], grad_scale * q[y], *grads);
        }
    }
    return elbo;
}

ElboBreakdown elbo_labeled(const TggmModel& m, std::span<const double> x, std::span<const double> noise,
                           TggmGrads* grads, double grad_scale) {
    check_patch(m, x);
    const ComponentPass pass = run_component(m, x, 1, noise);
    ElboBreakdown elbo;
    elbo.reconstruction = pass.rec;
    elbo.kl_z = pass.kl_z;
    elbo.kl_y = 0.0;
    elbo.total = elbo.reconstruction - elbo.kl_z;
    if (grads != nullptr) {
        backprop_component(m, x, noise, pass, grad_scale, *grads);
    }
    return elbo;
}

double total_loss(const TggmModel& m, const std::vector<const Vec*>& batch_u, const std::vector<const Vec*>& batch_t,
                  const BatchNoise& noise, TggmGrads* grads, double labeled_weight) {
    if (batch_u.empty() && batch_t.empty()) {
        throw std::invalid_argument("total_loss: both batches empty");
    }
    if (noise.unlabeled.size() != batch_u.size() || noise.labeled.size() != batch_t.size()) {
        throw std::invalid_argument("total_loss: noise layout does not match batches");
    }
    double loss = 0.0;
    if (!batch_u.empty()) {
        const double scale = -1.0 / static_cast<double>(batch_u.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < batch_u.size(); ++i) {
            sum += elbo_unlabeled(m, *batch_u[i], noise.unlabeled[i], grads, scale).total;
        }
        loss += scale * sum;
    }
    if (!batch_t.empty()) {
        const double scale = -labeled_weight / static_cast<double>(batch_t.size());
        double sum = 0.0;
        for (std::size_t i = 0; i < batch_t.size(); ++i) {
            sum += elbo_labeled(m, *batch_t[i], noise.labeled[i], grads, scale).total;
        }
        loss += scale * sum;
    }
    return loss;
}

}  // namespace tggm
