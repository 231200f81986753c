#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "tggm/windowing.hpp"

using namespace tggm;

namespace {

RoiPolygon whole_image_roi(int w, int h) {
    RoiPolygon roi;
    roi.vertices = {{-0.5, -0.5}, {w - 0.5, -0.5}, {w - 0.5, h - 0.5}, {-0.5, h - 0.5}};
    return roi;
}

// star-shaped construction: always a simple polygon
RoiPolygon random_simple_polygon(std::mt19937_64& rng, double cx, double cy, double r_min, double r_max) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = 3 + static_cast<int>(rng() % 8);
    std::vector<double> angles(n);
    for (double& a : angles) {
        a = unit(rng) * 2.0 * 3.14159265358979323846;
    }
    std::sort(angles.begin(), angles.end());
    RoiPolygon roi;
    for (double a : angles) {
        const double r = r_min + unit(rng) * (r_max - r_min);
        roi.vertices.emplace_back(cx + r * std::cos(a), cy + r * std::sin(a));
    }
    return roi;
}

Image checkerboard(int w, int h) {
    Image img(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            img.at(x, y) = static_cast<std::uint8_t>((x + y) % 2 == 0 ? 255 : 0);
        }
    }
    return img;
}

}  // namespace

TEST_CASE("slide_windows: exact tiling of a full-image ROI") {
    const auto windows = slide_windows(100, 100, whole_image_roi(100, 100), 20, 20);
    CHECK(windows.size() == 25);
    CHECK(windows.front() == Window{0, 0, 20});
    CHECK(windows.back() == Window{80, 80, 20});
    // row-major order
    CHECK(windows[1] == Window{20, 0, 20});
    CHECK(windows[5] == Window{0, 20, 20});
}

TEST_CASE("slide_windows: sliver ROI with no lattice centers is empty") {
    RoiPolygon sliver;
    sliver.vertices = {{0.0, 0.0}, {0.4, 0.0}, {0.0, 0.4}};
    const auto windows = slide_windows(100, 100, sliver, 20, 20);
    CHECK(windows.empty());
}

TEST_CASE("slide_windows: pentagon ROI matches the brute-force oracle") {
    RoiPolygon pentagon;
    pentagon.vertices = {{100.3, 20.7}, {180.1, 80.4}, {150.9, 170.2}, {60.2, 170.8}, {20.6, 80.1}};
    const auto got = slide_windows(200, 200, pentagon, 16, 8);
    const auto expected = oracle::slide_windows_ref(200, 200, pentagon, 16, 8);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i] == expected[i]);
    }
    CHECK(!got.empty());
}

TEST_CASE("slide_windows: random simple polygons match the brute-force oracle") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const RoiPolygon roi = random_simple_polygon(rng, 90.0 + (rng() % 40), 80.0 + (rng() % 30), 15.0, 65.0);
        const int size = 8 + static_cast<int>(rng() % 9);
        const int stride = 3 + static_cast<int>(rng() % 6);
        const auto got = slide_windows(200, 180, roi, size, stride);
        const auto expected = oracle::slide_windows_ref(200, 180, roi, size, stride);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i] == expected[i]);
        }
    }
}

TEST_CASE("slide_windows: rejects oversized windows and zero stride") {
    CHECK_THROWS_AS(slide_windows(10, 10, whole_image_roi(10, 10), 20, 5), std::invalid_argument);
    CHECK_THROWS_AS(slide_windows(100, 100, whole_image_roi(100, 100), 10, 0), std::invalid_argument);
}

TEST_CASE("extract_patch: black and white regions") {
    Image black(8, 8, 1, 0);
    const Patch p0 = extract_patch(black, Window{0, 0, 4});
    for (double v : p0.pixels) {
        CHECK(v == 0.0);
    }
    Image white(8, 8, 1, 255);
    const Patch p1 = extract_patch(white, Window{2, 2, 4});
    for (double v : p1.pixels) {
        CHECK(v == 1.0);
    }
    CHECK(p1.source == Window{2, 2, 4});
}

TEST_CASE("extract_patch: checkerboard fixture reads out exactly") {
    const Image img = checkerboard(10, 10);
    const Patch p = extract_patch(img, Window{1, 0, 3});
    // top-left pixel of the window is (1, 0): odd sum -> 0
    const Vec expected{0, 1, 0, 1, 0, 1, 0, 1, 0};
    REQUIRE(p.pixels.size() == 9);
    for (int i = 0; i < 9; ++i) {
        CHECK(p.pixels[i] == expected[i]);
    }
}

TEST_CASE("extract_patch: normalization round-trips the source bytes") {
    std::mt19937_64 rng(5150);
    Image img(32, 32, 3);
    for (auto& b : img.data) {
        b = static_cast<std::uint8_t>(rng() % 256);
    }
    const Window w{5, 7, 12};
    const Patch p = extract_patch(img, w);
    std::size_t k = 0;
    for (int dy = 0; dy < w.size; ++dy) {
        for (int dx = 0; dx < w.size; ++dx) {
            for (int c = 0; c < 3; ++c) {
                const auto back = static_cast<std::uint8_t>(std::lround(p.pixels[k++] * 255.0));
                CHECK(back == img.at(w.x + dx, w.y + dy, c));
            }
        }
    }
}

TEST_CASE("extract_patch: out-of-bounds window is rejected") {
    Image img(8, 8, 1);
    CHECK_THROWS_AS(extract_patch(img, Window{6, 6, 4}), std::invalid_argument);
    CHECK_THROWS_AS(extract_patch(img, Window{-1, 0, 4}), std::invalid_argument);
}

TEST_CASE("augment_target: identity augmentation returns exactly the seed patch") {
    const Image img = checkerboard(16, 16);
    const Window seed{4, 4, 6};
    const AugmentResult res = augment_target(img, seed, {0}, {{0, 0}});
    REQUIRE(res.patches.size() == 1);
    CHECK(res.skipped == 0);
    CHECK(res.patches[0].pixels == extract_patch(img, seed).pixels);
}

TEST_CASE("augment_target: rotation-symmetric patch is invariant") {
    // concentric square pattern, symmetric under quarter turns
    Image img(8, 8, 1);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            const int ring = std::min(std::min(x, 7 - x), std::min(y, 7 - y));
            img.at(x, y) = static_cast<std::uint8_t>(40 * ring);
        }
    }
    const Window seed{0, 0, 8};
    const Patch base = extract_patch(img, seed);
    const AugmentResult res = augment_target(img, seed, {0, 90, 180, 270}, {{0, 0}});
    REQUIRE(res.patches.size() == 4);
    for (const Patch& p : res.patches) {
        CHECK(p.pixels == base.pixels);
    }
}

TEST_CASE("augment_target: 4 rotations x 9 translations give 36 distinct patches") {
    std::mt19937_64 rng(31337);
    Image img(64, 64, 1);
    for (auto& b : img.data) {
        b = static_cast<std::uint8_t>(rng() % 256);
    }
    const Window seed{24, 24, 8};
    std::vector<std::pair<int, int>> translations;
    for (int dy : {-2, 0, 2}) {
        for (int dx : {-2, 0, 2}) {
            translations.emplace_back(dx, dy);
        }
    }
    const AugmentResult res = augment_target(img, seed, {0, 90, 180, 270}, translations);
    CHECK(res.skipped == 0);
    REQUIRE(res.patches.size() == 36);
    std::set<Vec> unique;
    for (const Patch& p : res.patches) {
        unique.insert(p.pixels);
    }
    CHECK(unique.size() == 36);
}

TEST_CASE("augment_target: combinations leaving the image are skipped and counted") {
    const Image img = checkerboard(16, 16);
    const Window seed{0, 0, 8};  // at the corner: negative offsets fall outside
    std::vector<std::pair<int, int>> translations{{-2, 0}, {0, -2}, {0, 0}, {2, 2}};
    const AugmentResult res = augment_target(img, seed, {0, 180}, translations);
    CHECK(res.skipped == 4);
    CHECK(res.patches.size() == 4);
}

TEST_CASE("rotate_patch: four quarter turns are the identity") {
    const Image img = checkerboard(12, 12);
    const Patch p = extract_patch(img, Window{1, 2, 5});
    CHECK(rotate_patch(p, 360).pixels == p.pixels);
    const Patch q = rotate_patch(rotate_patch(rotate_patch(rotate_patch(p, 90), 90), 90), 90);
    CHECK(q.pixels == p.pixels);
}
