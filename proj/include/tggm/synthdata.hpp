#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tggm/evaluation.hpp"
#include "tggm/trainer.hpp"
#include "tggm/windowing.hpp"

namespace tggm {

enum class BackgroundKind { kFlat, kStripes };
enum class DistractorShape { kBar, kBlob };

struct SceneSpec {
    int width = 256;
    int height = 256;
    BackgroundKind background = BackgroundKind::kFlat;
    double background_level = 0.25;
    double stripe_amplitude = 0.0;
    int stripe_period = 8;
    RoiPolygon roi;
    int target_count = 0;
    int target_size_min = 16;
    int target_size_max = 16;
    double target_intensity_min = 0.8;
    double target_intensity_max = 0.9;
    double min_separation = 8.0;
    int distractor_count = 0;
    DistractorShape distractor_shape = DistractorShape::kBar;
    double distractor_intensity_min = 0.5;
    double distractor_intensity_max = 0.6;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct SceneTruth {
    Image image;
    std::vector<Box> target_boxes;
    RoiPolygon roi;
};

// Rejection-samples non-overlapping bright rectangles inside the ROI plus
// distractor shapes elsewhere, then adds clipped Gaussian noise. Throws
// CapacityError when placement cannot satisfy the spec.
SceneTruth generate_scene(const SceneSpec& spec);

struct Benchmark {
    SceneSpec spec;
    SceneTruth truth;
    Window seed_window;  // the first ground-truth target
    TrainConfig config;
};

enum class Difficulty { kEasy, kTextured };

// Fixed desk-scale scenes: 256x256, 12 bright 16x16 targets on a 0.25
// background with sigma 0.02 noise; the textured variant adds period-8
// stripes and bar distractors.
Benchmark make_benchmark(Difficulty difficulty);

}  // namespace tggm
