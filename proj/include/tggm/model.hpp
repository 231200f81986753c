#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tggm/numerics.hpp"

namespace tggm {

inline constexpr int kCategories = 2;  // y = 1 target, y = 0 non-target

// Pixel log-variances are floored well above the generic clamp so the
// reconstruction term cannot blow up when the decoder nails a patch.
inline constexpr double kPixelLogVarMin = -6.907755278982137;  // log(1e-3)

// Four two-layer networks plus the categorical prior. All math is over
// flattened patches normalized to [0, 1].
struct TggmModel {
    LayerStack f_inf;    // [patch ; one-hot(y)] -> [mu_z ; log_var_z]
    LayerStack f_cls;    // patch -> category logits
    LayerStack f_prior;  // one-hot(y) -> [mu_z ; log_var_z]
    LayerStack f_gen;    // z -> [pixel mean logits ; pixel log_var]
    Vec prior_y;         // p(y), length 2, sums to 1
    int latent_dim = 0;
    int patch_dim = 0;
};

TggmModel make_model(int patch_dim, int latent_dim, int hidden_width, std::uint64_t seed);

// Throws if dimensions do not chain or prior_y is not a length-2 distribution.
void validate_model(const TggmModel& m);

struct TggmGrads {
    StackGrads f_inf;
    StackGrads f_cls;
    StackGrads f_prior;
    StackGrads f_gen;

    void set_zero();
};

TggmGrads make_zero_grads(const TggmModel& m);

// Flat parameter vector in a fixed order (f_inf, f_cls, f_prior, f_gen;
// weights then biases per layer). prior_y is not a gradient-trained
// parameter and is excluded.
std::size_t parameter_count(const TggmModel& m);
Vec flatten_params(const TggmModel& m);
void unflatten_params(TggmModel& m, std::span<const double> flat);
Vec flatten_grads(const TggmModel& m, const TggmGrads& g);

struct ElboBreakdown {
    double reconstruction = 0.0;
    double kl_z = 0.0;
    double kl_y = 0.0;
    double total = 0.0;  // reconstruction - kl_z - kl_y
};

// One standard-normal latent noise vector per mixture component.
using ComponentNoise = std::array<Vec, kCategories>;

GaussianParams infer_posterior(const TggmModel& m, std::span<const double> x, int y);
Vec classify(const TggmModel& m, std::span<const double> x);
GaussianParams prior_component(const TggmModel& m, int y);

// Per-pixel Gaussian over patch space; the mean head is squashed through a
// logistic into [0, 1].
GaussianParams decode(const TggmModel& m, std::span<const double> z);

struct MixturePosterior {
    std::array<double, kCategories> weights;
    std::array<GaussianParams, kCategories> components;
};

MixturePosterior mixture_posterior(const TggmModel& m, std::span<const double> x);

// Ancestral sample: z from p(z|y), then a patch from the decoded Gaussian,
// clipped to [0, 1]. Both noises are injected.
Vec generate(const TggmModel& m, int y, std::span<const double> noise_z, std::span<const double> noise_x);

// ELBO for an unlabeled patch. The expectation over y is enumerated exactly:
// both decoder branches run every call. When `grads` is given, grad_scale *
// d(total)/d(theta) is accumulated into it.
ElboBreakdown elbo_unlabeled(const TggmModel& m, std::span<const double> x, const ComponentNoise& noise,
                             TggmGrads* grads = nullptr, double grad_scale = 1.0);

// ELBO for a labeled target patch: the y = 1 branch only. f_cls never enters
// the graph and the y = 0 one-hot column of f_prior's first layer gets an
// exactly-zero gradient.
ElboBreakdown elbo_labeled(const TggmModel& m, std::span<const double> x, std::span<const double> noise,
                           TggmGrads* grads = nullptr, double grad_scale = 1.0);

// Noise for one optimization step, drawn by the caller.
struct BatchNoise {
    std::vector<ComponentNoise> unlabeled;  // one pair per unlabeled patch
    std::vector<Vec> labeled;               // one vector per labeled patch
};

// -[ mean_u elbo_unlabeled + labeled_weight * mean_t elbo_labeled ].
// Gradients of the loss are accumulated when `grads` is given.
double total_loss(const TggmModel& m, const std::vector<const Vec*>& batch_u, const std::vector<const Vec*>& batch_t,
                  const BatchNoise& noise, TggmGrads* grads = nullptr, double labeled_weight = 1.0);

}  // namespace tggm
