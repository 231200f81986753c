#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "oracles.hpp"
#include "tggm/errors.hpp"
#include "tggm/synthdata.hpp"

using namespace tggm;

namespace {

SceneSpec empty_scene(double level) {
    SceneSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.background_level = level;
    spec.target_count = 0;
    spec.distractor_count = 0;
    spec.noise_sigma = 0.0;
    return spec;
}

double box_gap(const Box& a, const Box& b) {
    const double gx = std::max({a.x - (b.x + b.width), b.x - (a.x + a.width), 0.0});
    const double gy = std::max({a.y - (b.y + b.height), b.y - (a.y + a.height), 0.0});
    if (gx == 0.0 && gy == 0.0) {
        return -1.0;  // overlapping or touching
    }
    return std::max(gx, gy);
}

}  // namespace

TEST_CASE("generate_scene: empty flat scene is constant") {
    const SceneTruth truth = generate_scene(empty_scene(0.3));
    const auto expected = static_cast<std::uint8_t>(std::lround(0.3 * 255.0));
    for (auto b : truth.image.data) {
        CHECK(b == expected);
    }
    CHECK(truth.target_boxes.empty());
}

TEST_CASE("generate_scene: places the requested targets with separation") {
    SceneSpec spec;
    spec.width = 200;
    spec.height = 200;
    spec.roi.vertices = {{5, 5}, {195, 5}, {195, 195}, {5, 195}};
    spec.target_count = 5;
    spec.target_size_min = 10;
    spec.target_size_max = 14;
    spec.min_separation = 9.0;
    spec.seed = 42;
    const SceneTruth truth = generate_scene(spec);
    REQUIRE(truth.target_boxes.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = i + 1; j < 5; ++j) {
            CHECK(box_gap(truth.target_boxes[i], truth.target_boxes[j]) >= spec.min_separation);
        }
    }
}

TEST_CASE("generate_scene: identical seeds give bitwise-identical scenes") {
    const Benchmark a = make_benchmark(Difficulty::kEasy);
    const Benchmark b = make_benchmark(Difficulty::kEasy);
    CHECK(a.truth.image.data == b.truth.image.data);
    REQUIRE(a.truth.target_boxes.size() == b.truth.target_boxes.size());
    for (std::size_t i = 0; i < a.truth.target_boxes.size(); ++i) {
        CHECK(a.truth.target_boxes[i] == b.truth.target_boxes[i]);
    }
}

TEST_CASE("generate_scene: impossible placement raises a capacity error") {
    SceneSpec spec;
    spec.width = 64;
    spec.height = 64;
    spec.roi.vertices = {{2, 2}, {20, 2}, {20, 20}, {2, 20}};
    spec.target_count = 50;  // cannot fit in an 18x18 region
    spec.target_size_min = 8;
    spec.target_size_max = 8;
    spec.min_separation = 6.0;
    CHECK_THROWS_AS(generate_scene(spec), CapacityError);
}

TEST_CASE("generate_scene: noise stays clipped to [0, 1]") {
    SceneSpec spec = empty_scene(0.02);
    spec.noise_sigma = 0.5;
    spec.seed = 9;
    const SceneTruth truth = generate_scene(spec);
    bool any_zero = false;
    for (auto b : truth.image.data) {
        any_zero = any_zero || b == 0;
    }
    CHECK(any_zero);  // heavy noise on a dark background clips at 0
}

TEST_CASE("make_benchmark easy: target and background pixels separate cleanly") {
    const Benchmark bench = make_benchmark(Difficulty::kEasy);
    REQUIRE(bench.truth.target_boxes.size() == 12);

    double target_sum = 0.0;
    long target_n = 0;
    std::vector<std::uint8_t> inside(bench.truth.image.data.size(), 0);
    for (const Box& b : bench.truth.target_boxes) {
        for (int y = static_cast<int>(b.y); y < static_cast<int>(b.y + b.height); ++y) {
            for (int x = static_cast<int>(b.x); x < static_cast<int>(b.x + b.width); ++x) {
                target_sum += bench.truth.image.at(x, y) / 255.0;
                ++target_n;
                inside[static_cast<std::size_t>(y) * bench.truth.image.width + x] = 1;
            }
        }
    }
    double bg_sum = 0.0;
    long bg_n = 0;
    for (std::size_t i = 0; i < inside.size(); ++i) {
        if (!inside[i]) {
            bg_sum += bench.truth.image.data[i] / 255.0;
            ++bg_n;
        }
    }
    const double separation = target_sum / target_n - bg_sum / bg_n;
    CHECK(separation > 10.0 * bench.spec.noise_sigma);
}

TEST_CASE("make_benchmark easy: window count at stride 8 matches the lattice oracle") {
    const Benchmark bench = make_benchmark(Difficulty::kEasy);
    const auto got = slide_windows(256, 256, bench.truth.roi, 16, 8);
    const auto expected = oracle::slide_windows_ref(256, 256, bench.truth.roi, 16, 8);
    CHECK(got.size() == expected.size());
    CHECK(!got.empty());
}

TEST_CASE("make_benchmark easy: seed window is brighter than the background") {
    const Benchmark bench = make_benchmark(Difficulty::kEasy);
    const Patch seed = extract_patch(bench.truth.image, bench.seed_window);
    double seed_mean = 0.0;
    for (double v : seed.pixels) {
        seed_mean += v;
    }
    seed_mean /= seed.pixels.size();

    // a window in the ROI far from every target
    const Patch bg = extract_patch(bench.truth.image, Window{120, 120, 16});
    bool clear = true;
    for (const Box& b : bench.truth.target_boxes) {
        clear = clear && iou(Box{120, 120, 16, 16}, b) == 0.0;
    }
    double bg_mean = 0.0;
    for (double v : bg.pixels) {
        bg_mean += v;
    }
    bg_mean /= bg.pixels.size();
    if (clear) {
        CHECK(seed_mean > bg_mean);
    } else {
        CHECK(seed_mean > 0.5);
    }
}

TEST_CASE("make_benchmark: targets sit inside the ROI") {
    for (Difficulty d : {Difficulty::kEasy, Difficulty::kTextured}) {
        const Benchmark bench = make_benchmark(d);
        for (const Box& b : bench.truth.target_boxes) {
            CHECK(point_in_polygon(bench.truth.roi, b.x + b.width / 2.0, b.y + b.height / 2.0));
        }
    }
}

TEST_CASE("make_benchmark textured: stripes and distractors are present") {
    const Benchmark bench = make_benchmark(Difficulty::kTextured);
    REQUIRE(bench.truth.target_boxes.size() == 12);
    // stripe contrast: rows 0..7 vs rows 8..15 in a corner away from the ROI
    double band0 = 0.0, band1 = 0.0;
    for (int x = 0; x < 8; ++x) {
        for (int y = 0; y < 8; ++y) {
            band0 += bench.truth.image.at(x, y);
        }
        for (int y = 8; y < 16; ++y) {
            band1 += bench.truth.image.at(x, y);
        }
    }
    CHECK(std::abs(band0 - band1) / (8 * 8) > 20.0);
}

TEST_CASE("grid_ground_truth on a scene matches the brute-force rule at target size") {
    const Benchmark bench = make_benchmark(Difficulty::kEasy);
    const GridMask got = grid_ground_truth(bench.truth.target_boxes, 256, 256, 16);
    const GridMask expected = oracle::grid_mask_ref(bench.truth.target_boxes, 256, 256, 16);
    REQUIRE(got.cells.size() == expected.cells.size());
    for (std::size_t i = 0; i < got.cells.size(); ++i) {
        CHECK(got.cells[i] == expected.cells[i]);
    }
}
