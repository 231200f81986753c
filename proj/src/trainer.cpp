#include "tggm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "tggm/errors.hpp"

namespace tggm {

void validate_config(const TrainConfig& cfg) {
    if (cfg.epochs_per_iteration <= 0 || cfg.minibatch_size <= 0 || cfg.latent_dim <= 0 || cfg.hidden_width <= 0) {
        throw std::invalid_argument("TrainConfig: sizes must be positive");
    }
    if (cfg.max_iterations < 0 || cfg.stride < 0) {
        throw std::invalid_argument("TrainConfig: max_iterations and stride must be non-negative");
    }
    if (cfg.learning_rate < 0.0) {
        throw std::invalid_argument("TrainConfig: learning_rate must be non-negative");
    }
    if (!(cfg.target_threshold > 0.0) || !(cfg.target_threshold < 1.0)) {
        throw std::invalid_argument("TrainConfig: target_threshold must lie in (0, 1)");
    }
    if (cfg.labeled_loss_weight < 0.0) {
        throw std::invalid_argument("TrainConfig: labeled_loss_weight must be non-negative");
    }
    for (int deg : cfg.augmentation.rotations) {
        if (((deg % 90) + 90) % 90 != 0) {
            throw std::invalid_argument("TrainConfig: rotations must be multiples of 90 degrees");
        }
    }
}

std::vector<int> IterationState::unlabeled_ids() const {
    std::vector<int> ids;
    ids.reserve(windows.size());
    for (int i = 0; i < static_cast<int>(windows.size()); ++i) {
        if (!detected[i]) {
            ids.push_back(i);
        }
    }
    return ids;
}

const Vec& IterationState::labeled_pixels(std::size_t i) const {
    if (i < seed_patches.size()) {
        return seed_patches[i].pixels;
    }
    return window_patches[detected_order[i - seed_patches.size()]].pixels;
}

IterationState make_state(std::vector<Patch> seed_patches, std::vector<Window> windows,
                          std::vector<Patch> window_patches, std::uint64_t seed) {
    if (seed_patches.empty()) {
        throw std::invalid_argument("make_state: at least one labeled seed patch is required");
    }
    if (windows.size() != window_patches.size()) {
        throw std::invalid_argument("make_state: windows and patches must align");
    }
    IterationState s;
    s.seed_patches = std::move(seed_patches);
    s.windows = std::move(windows);
    s.window_patches = std::move(window_patches);
    s.detected.assign(s.windows.size(), 0);
    s.detected_at.assign(s.windows.size(), 0);
    s.rng_seed = seed;
    s.rng.seed(seed);
    return s;
}

namespace {

Vec draw_noise(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Vec v(dim);
    for (double& x : v) {
        x = normal(rng);
    }
    return v;
}

}  // namespace

double train_epoch(TggmModel& m, IterationState& s, const TrainConfig& cfg, AdamState& opt) {
    const std::vector<int> order = [&] {
        std::vector<int> ids = s.unlabeled_ids();
        std::shuffle(ids.begin(), ids.end(), s.rng);
        return ids;
    }();
    if (order.empty()) {
        throw std::invalid_argument("train_epoch: unlabeled set is empty");
    }
    const std::size_t batch_size = std::min<std::size_t>(cfg.minibatch_size, order.size());
    const std::size_t labeled_total = s.labeled_count();
    std::uniform_int_distribution<std::size_t> labeled_dist(0, labeled_total - 1);

    TggmGrads grads = make_zero_grads(m);
    double loss_sum = 0.0;
    int steps = 0;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<const Vec*> batch_u;
        std::vector<const Vec*> batch_t;
        BatchNoise noise;
        for (std::size_t i = start; i < end; ++i) {
            batch_u.push_back(&s.window_patches[order[i]].pixels);
            noise.unlabeled.push_back({draw_noise(s.rng, m.latent_dim), draw_noise(s.rng, m.latent_dim)});
        }
        for (std::size_t i = start; i < end; ++i) {
            batch_t.push_back(&s.labeled_pixels(labeled_dist(s.rng)));
            noise.labeled.push_back(draw_noise(s.rng, m.latent_dim));
        }
        grads.set_zero();
        loss_sum += total_loss(m, batch_u, batch_t, noise, &grads, cfg.labeled_loss_weight);
        Vec params = flatten_params(m);
        const Vec flat = flatten_grads(m, grads);
        adam_step(opt, params, flat);
        unflatten_params(m, params);
        ++steps;
    }
    return loss_sum / steps;
}

std::vector<Assignment> assign_clusters(const TggmModel& m, const std::vector<Patch>& patches, double tau) {
    std::vector<Assignment> out;
    out.reserve(patches.size());
    for (const Patch& p : patches) {
        const Vec q = classify(m, p.pixels);
        out.push_back(Assignment{q[1], q[1] >= tau});
    }
    return out;
}

Vec relax_prior(const IterationState& s) {
    if (s.iteration < 1 || s.windows.empty()) {
        return Vec{0.5, 0.5};
    }
    const double raw = static_cast<double>(s.detected_order.size()) / static_cast<double>(s.windows.size());
    const double p1 = std::clamp(raw, 0.05, 0.95);
    return Vec{1.0 - p1, p1};
}

IterationOutcome detection_iteration(TggmModel& m, IterationState& s, const TrainConfig& cfg) {
    IterationOutcome outcome;
    if (s.unlabeled_ids().empty()) {
        // nothing left to cluster: fixed point
        s.iteration += 1;
        s.prior_y = relax_prior(s);
        return outcome;
    }
    m.prior_y = s.prior_y;
    AdamState opt(parameter_count(m), cfg.learning_rate);
    outcome.epoch_losses.reserve(cfg.epochs_per_iteration);
    for (int epoch = 0; epoch < cfg.epochs_per_iteration; ++epoch) {
        outcome.epoch_losses.push_back(train_epoch(m, s, cfg, opt));
    }
    const std::vector<Assignment> assignments = assign_clusters(m, s.window_patches, cfg.target_threshold);
    s.iteration += 1;
    for (int id = 0; id < static_cast<int>(s.windows.size()); ++id) {
        if (!s.detected[id] && assignments[id].is_target) {
            s.detected[id] = 1;
            s.detected_order.push_back(id);
            s.detected_at[id] = s.iteration;
            ++outcome.newly_detected;
        }
    }
    s.prior_y = relax_prior(s);
    return outcome;
}

DetectionResult run(const Image& image, const RoiPolygon& roi, const Window& seed_window, const TrainConfig& cfg) {
    validate_config(cfg);
    const int size = seed_window.size;
    if (size <= 0) {
        throw std::invalid_argument("run: seed window size must be positive");
    }
    const int stride = cfg.stride > 0 ? cfg.stride : std::max(1, size / 2);
    std::vector<Window> windows = slide_windows(image.width, image.height, roi, size, stride);
    if (windows.empty()) {
        throw EmptyRoiError("run: ROI admits no windows at this size and stride");
    }
    if (!point_in_polygon(roi, seed_window.x + size / 2.0, seed_window.y + size / 2.0)) {
        std::cerr << "warning: seed window center lies outside the ROI; using it anyway\n";
    }

    std::vector<Patch> window_patches;
    window_patches.reserve(windows.size());
    for (const Window& w : windows) {
        window_patches.push_back(extract_patch(image, w));
    }

    std::vector<int> rotations = cfg.augmentation.rotations;
    if (rotations.empty()) {
        rotations = {0, 90, 180, 270};
    }
    std::vector<std::pair<int, int>> translations = cfg.augmentation.translations;
    if (translations.empty()) {
        const int step = std::max(1, size / 4);
        for (int dy : {-step, 0, step}) {
            for (int dx : {-step, 0, step}) {
                translations.emplace_back(dx, dy);
            }
        }
    }
    AugmentResult augmented = augment_target(image, seed_window, rotations, translations);
    if (augmented.skipped > 0) {
        std::cerr << "warning: " << augmented.skipped << " augmentation offsets left the image and were skipped\n";
    }
    if (augmented.patches.empty()) {
        augmented.patches.push_back(extract_patch(image, seed_window));
    }

    std::mt19937_64 master(cfg.seed);
    const std::uint64_t model_seed = master();
    const std::uint64_t state_seed = master();

    const int patch_dim = size * size * image.channels;
    TggmModel model = make_model(patch_dim, cfg.latent_dim, cfg.hidden_width, model_seed);
    IterationState state = make_state(std::move(augmented.patches), std::move(windows), std::move(window_patches),
                                      state_seed);

    DetectionResult result;
    result.seed = cfg.seed;
    result.window_count = static_cast<int>(state.windows.size());
    result.termination = "max_iterations";
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        IterationOutcome outcome = detection_iteration(model, state, cfg);
        IterationRecord record;
        record.iteration = state.iteration;
        record.newly_detected = outcome.newly_detected;
        record.detected_total = static_cast<int>(state.detected_order.size());
        record.prior_y = state.prior_y;
        record.epoch_losses = std::move(outcome.epoch_losses);
        result.history.push_back(std::move(record));
        if (result.history.back().newly_detected == 0) {
            result.termination = "converged";
            break;
        }
    }

    const std::vector<Assignment> final_scores = assign_clusters(model, state.window_patches, cfg.target_threshold);
    for (int id : state.detected_order) {
        result.detections.push_back(DetectionRow{state.windows[id], final_scores[id].probability,
                                                 state.detected_at[id]});
    }
    result.model = std::move(model);
    return result;
}

}  // namespace tggm
