#include "tggm/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tggm/errors.hpp"

namespace tggm {

namespace {

struct PlacedRect {
    double x, y, w, h;
};

bool rects_separated(const PlacedRect& a, const PlacedRect& b, double gap) {
    return a.x + a.w + gap <= b.x || b.x + b.w + gap <= a.x || a.y + a.h + gap <= b.y || b.y + b.h + gap <= a.y;
}

bool box_inside_roi(const RoiPolygon& roi, double x, double y, double w, double h) {
    return point_in_polygon(roi, x, y) && point_in_polygon(roi, x + w, y) && point_in_polygon(roi, x, y + h) &&
           point_in_polygon(roi, x + w, y + h) && point_in_polygon(roi, x + w / 2.0, y + h / 2.0);
}

void fill_rect(std::vector<double>& canvas, int width, int height, int x0, int y0, int w, int h, double value) {
    const int x1 = std::min(width, x0 + w);
    const int y1 = std::min(height, y0 + h);
    for (int y = std::max(0, y0); y < y1; ++y) {
        for (int x = std::max(0, x0); x < x1; ++x) {
            canvas[static_cast<std::size_t>(y) * width + x] = value;
        }
    }
}

void fill_disc(std::vector<double>& canvas, int width, int height, int cx, int cy, int radius, double value) {
    for (int y = std::max(0, cy - radius); y <= std::min(height - 1, cy + radius); ++y) {
        for (int x = std::max(0, cx - radius); x <= std::min(width - 1, cx + radius); ++x) {
            const int dx = x - cx;
            const int dy = y - cy;
            if (dx * dx + dy * dy <= radius * radius) {
                canvas[static_cast<std::size_t>(y) * width + x] = value;
            }
        }
    }
}

void validate_spec(const SceneSpec& spec) {
    if (spec.width <= 0 || spec.height <= 0) {
        throw std::invalid_argument("generate_scene: image dimensions must be positive");
    }
    if (spec.target_count < 0 || spec.distractor_count < 0) {
        throw std::invalid_argument("generate_scene: counts must be non-negative");
    }
    if (spec.target_count > 0 && spec.roi.vertices.size() < 3) {
        throw std::invalid_argument("generate_scene: targets need an ROI polygon");
    }
    if (spec.target_size_min <= 0 || spec.target_size_max < spec.target_size_min) {
        throw std::invalid_argument("generate_scene: bad target size range");
    }
    if (spec.min_separation < 0.0) {
        throw std::invalid_argument("generate_scene: min_separation must be >= 0");
    }
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(spec.target_intensity_min) || !in_unit(spec.target_intensity_max) ||
        !in_unit(spec.distractor_intensity_min) || !in_unit(spec.distractor_intensity_max) ||
        !in_unit(spec.background_level)) {
        throw std::invalid_argument("generate_scene: intensities must lie in [0, 1]");
    }
    if (spec.noise_sigma < 0.0) {
        throw std::invalid_argument("generate_scene: noise_sigma must be >= 0");
    }
    if (spec.background == BackgroundKind::kStripes && spec.stripe_period <= 0) {
        throw std::invalid_argument("generate_scene: stripe period must be positive");
    }
}

}  // namespace

SceneTruth generate_scene(const SceneSpec& spec) {
    validate_spec(spec);
    std::mt19937_64 rng(spec.seed);

    std::vector<double> canvas(static_cast<std::size_t>(spec.width) * spec.height, spec.background_level);
    if (spec.background == BackgroundKind::kStripes) {
        for (int y = 0; y < spec.height; ++y) {
            const double v = spec.background_level +
                             ((y / spec.stripe_period) % 2 == 0 ? spec.stripe_amplitude : -spec.stripe_amplitude);
            fill_rect(canvas, spec.width, spec.height, 0, y, spec.width, 1, std::clamp(v, 0.0, 1.0));
        }
    }

    SceneTruth truth;
    truth.roi = spec.roi;

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<PlacedRect> placed;

    // targets: rejection sampling inside the ROI with pairwise separation
    long attempts = 0;
    const long attempt_budget = 10L * std::max(1, spec.target_count);
    while (static_cast<int>(truth.target_boxes.size()) < spec.target_count) {
        if (++attempts > attempt_budget) {
            throw CapacityError("generate_scene: could not place targets within the attempt budget");
        }
        std::uniform_int_distribution<int> size_dist(spec.target_size_min, spec.target_size_max);
        const int size = size_dist(rng);
        if (size > spec.width || size > spec.height) {
            throw CapacityError("generate_scene: target larger than the image");
        }
        std::uniform_int_distribution<int> x_dist(0, spec.width - size);
        std::uniform_int_distribution<int> y_dist(0, spec.height - size);
        const int x = x_dist(rng);
        const int y = y_dist(rng);
        const PlacedRect rect{static_cast<double>(x), static_cast<double>(y), static_cast<double>(size),
                              static_cast<double>(size)};
        if (!box_inside_roi(spec.roi, rect.x, rect.y, rect.w, rect.h)) {
            continue;
        }
        bool ok = true;
        for (const auto& other : placed) {
            if (!rects_separated(rect, other, spec.min_separation)) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            continue;
        }
        placed.push_back(rect);
        const double intensity =
            spec.target_intensity_min + unit(rng) * (spec.target_intensity_max - spec.target_intensity_min);
        fill_rect(canvas, spec.width, spec.height, x, y, size, size, intensity);
        truth.target_boxes.push_back(
            Box{static_cast<double>(x), static_cast<double>(y), static_cast<double>(size), static_cast<double>(size)});
    }

    // distractors: anywhere in the image, but never touching a target
    attempts = 0;
    const long distractor_budget = 10L * std::max(1, spec.distractor_count);
    int placed_distractors = 0;
    while (placed_distractors < spec.distractor_count) {
        if (++attempts > distractor_budget) {
            throw CapacityError("generate_scene: could not place distractors within the attempt budget");
        }
        const double intensity = spec.distractor_intensity_min +
                                 unit(rng) * (spec.distractor_intensity_max - spec.distractor_intensity_min);
        PlacedRect rect{};
        if (spec.distractor_shape == DistractorShape::kBar) {
            const bool horizontal = unit(rng) < 0.5;
            const int len = 20;
            const int thick = 4;
            const int w = horizontal ? len : thick;
            const int h = horizontal ? thick : len;
            if (w > spec.width || h > spec.height) {
                throw CapacityError("generate_scene: distractor larger than the image");
            }
            std::uniform_int_distribution<int> x_dist(0, spec.width - w);
            std::uniform_int_distribution<int> y_dist(0, spec.height - h);
            rect = PlacedRect{static_cast<double>(x_dist(rng)), static_cast<double>(y_dist(rng)),
                              static_cast<double>(w), static_cast<double>(h)};
        } else {
            const int radius = 5;
            std::uniform_int_distribution<int> x_dist(radius, spec.width - 1 - radius);
            std::uniform_int_distribution<int> y_dist(radius, spec.height - 1 - radius);
            const int cx = x_dist(rng);
            const int cy = y_dist(rng);
            rect = PlacedRect{static_cast<double>(cx - radius), static_cast<double>(cy - radius),
                              static_cast<double>(2 * radius + 1), static_cast<double>(2 * radius + 1)};
        }
        bool ok = true;
        for (std::size_t i = 0; i < truth.target_boxes.size(); ++i) {
            const Box& b = truth.target_boxes[i];
            if (!rects_separated(rect, PlacedRect{b.x, b.y, b.width, b.height}, spec.min_separation)) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            continue;
        }
        if (spec.distractor_shape == DistractorShape::kBar) {
            fill_rect(canvas, spec.width, spec.height, static_cast<int>(rect.x), static_cast<int>(rect.y),
                      static_cast<int>(rect.w), static_cast<int>(rect.h), intensity);
        } else {
            const int radius = 5;
            fill_disc(canvas, spec.width, spec.height, static_cast<int>(rect.x) + radius,
                      static_cast<int>(rect.y) + radius, radius, intensity);
        }
        ++placed_distractors;
    }

    if (spec.noise_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (double& v : canvas) {
            v = std::clamp(v + noise(rng), 0.0, 1.0);
        }
    }

    truth.image = Image(spec.width, spec.height, 1);
    for (std::size_t i = 0; i < canvas.size(); ++i) {
        truth.image.data[i] = static_cast<std::uint8_t>(std::lround(canvas[i] * 255.0));
    }
    return truth;
}

Benchmark make_benchmark(Difficulty difficulty) {
    SceneSpec spec;
    spec.width = 256;
    spec.height = 256;
    spec.background = BackgroundKind::kFlat;
    spec.background_level = 0.25;
    spec.roi.vertices = {{240, 128}, {200, 28}, {60, 20}, {16, 120}, {52, 228}, {204, 240}};
    spec.target_count = 12;
    spec.target_size_min = 16;
    spec.target_size_max = 16;
    spec.target_intensity_min = 0.80;
    spec.target_intensity_max = 0.90;
    spec.min_separation = 12.0;
    spec.noise_sigma = 0.02;
    spec.seed = 1234;
    if (difficulty == Difficulty::kTextured) {
        spec.background = BackgroundKind::kStripes;
        spec.stripe_amplitude = 0.1;
        spec.stripe_period = 8;
        spec.distractor_count = 8;
        spec.distractor_shape = DistractorShape::kBar;
        spec.distractor_intensity_min = 0.50;
        spec.distractor_intensity_max = 0.62;
    }

    Benchmark bench;
    bench.spec = spec;
    bench.truth = generate_scene(spec);
    const Box& first = bench.truth.target_boxes.front();
    bench.seed_window = Window{static_cast<int>(first.x), static_cast<int>(first.y), static_cast<int>(first.width)};

    TrainConfig cfg;
    cfg.epochs_per_iteration = 60;
    cfg.max_iterations = 7;
    cfg.minibatch_size = 32;
    cfg.learning_rate = 1e-3;
    cfg.target_threshold = 0.5;
    cfg.latent_dim = 8;
    cfg.hidden_width = 48;
    cfg.stride = 8;
    cfg.labeled_loss_weight = 1.0;
    cfg.seed = 7;
    bench.config = cfg;
    return bench;
}

}  // namespace tggm
