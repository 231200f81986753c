#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "tggm/model.hpp"
#include "tggm/windowing.hpp"

namespace tggm {

struct AugmentationSpec {
    std::vector<int> rotations;                       // empty = {0, 90, 180, 270}
    std::vector<std::pair<int, int>> translations;    // empty = 3x3 lattice at +-size/4
};

struct TrainConfig {
    int epochs_per_iteration = 200;
    int max_iterations = 7;
    int minibatch_size = 32;
    double learning_rate = 1e-3;
    double target_threshold = 0.5;
    int latent_dim = 10;
    int hidden_width = 256;
    int stride = 0;  // 0 = half the window size
    AugmentationSpec augmentation;
    double labeled_loss_weight = 1.0;
    std::uint64_t seed = 0;
};

void validate_config(const TrainConfig& cfg);

// State of the outer detection loop. Window-derived patches keep their
// lattice identity; once a window is detected it stays labeled, so the
// labeled and unlabeled sets always partition the lattice.
struct IterationState {
    std::vector<Patch> seed_patches;       // manual seed window + augmentations
    std::vector<Window> windows;           // the original lattice
    std::vector<Patch> window_patches;     // aligned with `windows`
    std::vector<std::uint8_t> detected;    // per window
    std::vector<int> detected_order;       // window ids in detection order
    std::vector<int> detected_at;          // per window: iteration detected, or 0
    int iteration = 0;
    Vec prior_y{0.5, 0.5};
    std::uint64_t rng_seed = 0;
    std::mt19937_64 rng;

    std::vector<int> unlabeled_ids() const;
    std::size_t labeled_count() const { return seed_patches.size() + detected_order.size(); }
    const Vec& labeled_pixels(std::size_t i) const;
};

IterationState make_state(std::vector<Patch> seed_patches, std::vector<Window> windows,
                          std::vector<Patch> window_patches, std::uint64_t seed);

// One pass over the shuffled unlabeled set. Every minibatch is paired with a
// same-size labeled batch resampled with replacement, so each Adam step mixes
// the labeled and unlabeled terms. Returns the mean step loss.
double train_epoch(TggmModel& m, IterationState& s, const TrainConfig& cfg, AdamState& opt);

struct Assignment {
    double probability = 0.0;  // q(y = 1 | x)
    bool is_target = false;
};

std::vector<Assignment> assign_clusters(const TggmModel& m, const std::vector<Patch>& patches, double tau);

struct IterationOutcome {
    int newly_detected = 0;
    std::vector<double> epoch_losses;
};

// Train for the epoch budget, score every lattice window, and move the ones
// crossing the threshold into the labeled set. Accumulation is monotone:
// previously detected windows stay labeled even if they fall below the
// threshold later.
IterationOutcome detection_iteration(TggmModel& m, IterationState& s, const TrainConfig& cfg);

// Uniform before the first iteration; afterwards p(y=1) is the detected
// fraction of the lattice, clamped into [0.05, 0.95].
Vec relax_prior(const IterationState& s);

struct IterationRecord {
    int iteration = 0;
    int newly_detected = 0;
    int detected_total = 0;
    Vec prior_y;  // prior handed to the next iteration
    std::vector<double> epoch_losses;
};

struct DetectionRow {
    Window window;
    double score = 0.0;
    int iteration_detected = 0;
};

struct DetectionResult {
    std::vector<DetectionRow> detections;
    std::vector<IterationRecord> history;
    TggmModel model;
    std::string termination;  // "converged" or "max_iterations"
    std::uint64_t seed = 0;
    int window_count = 0;
};

// The full iterative pipeline: windows, seed augmentation, model init, then
// detection iterations until nothing new crosses the threshold or the
// iteration cap is hit.
DetectionResult run(const Image& image, const RoiPolygon& roi, const Window& seed_window, const TrainConfig& cfg);

}  // namespace tggm
