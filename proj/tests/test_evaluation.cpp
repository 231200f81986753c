#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "oracles.hpp"
#include "tggm/evaluation.hpp"

using namespace tggm;

namespace {

bool same_boxes(const std::vector<ScoredBox>& a, const std::vector<ScoredBox>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!(a[i].box == b[i].box) || a[i].score != b[i].score) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("grid_ground_truth: box exactly covering one cell") {
    const GridMask mask = grid_ground_truth({Box{0, 0, 40, 40}}, 80, 80, 40);
    CHECK(mask.rows == 2);
    CHECK(mask.cols == 2);
    CHECK(mask.at(0, 0));
    CHECK(!mask.at(0, 1));
    CHECK(!mask.at(1, 0));
    CHECK(!mask.at(1, 1));
}

TEST_CASE("grid_ground_truth: small box strictly inside a cell marks it") {
    // overlap 400 = 100% of the box
    const GridMask mask = grid_ground_truth({Box{10, 10, 20, 20}}, 80, 80, 40);
    CHECK(mask.at(0, 0));
    CHECK(mask.count() == 1);
}

TEST_CASE("grid_ground_truth: box centered on a four-cell corner marks nothing") {
    // each overlap is 25 < 50 = half the box and 25 < 800 = half the cell
    const GridMask mask = grid_ground_truth({Box{35, 35, 10, 10}}, 80, 80, 40);
    CHECK(mask.count() == 0);
}

TEST_CASE("grid_predictions: empty, exact, and straddling windows") {
    CHECK(grid_predictions({}, 80, 80, 40).count() == 0);

    const GridMask exact = grid_predictions({Window{40, 0, 40}}, 80, 80, 40);
    CHECK(exact.count() == 1);
    CHECK(exact.at(0, 1));

    // window area = cell area, half in each cell: both overlaps hit 50%
    const GridMask straddle = grid_predictions({Window{20, 0, 40}}, 80, 80, 40);
    CHECK(straddle.at(0, 0));
    CHECK(straddle.at(0, 1));
}

TEST_CASE("grid masks match the pixel-counting oracle on random box sets") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 50; ++trial) {
        const int width = 80 + static_cast<int>(rng() % 60);
        const int height = 80 + static_cast<int>(rng() % 60);
        const int grid = 10 + static_cast<int>(rng() % 30);
        std::vector<Box> boxes;
        const int n = 1 + static_cast<int>(rng() % 6);
        for (int i = 0; i < n; ++i) {
            const int w = 4 + static_cast<int>(rng() % 30);
            const int h = 4 + static_cast<int>(rng() % 30);
            const int x = static_cast<int>(rng() % (width - w));
            const int y = static_cast<int>(rng() % (height - h));
            boxes.push_back(Box{static_cast<double>(x), static_cast<double>(y), static_cast<double>(w),
                                static_cast<double>(h)});
        }
        const GridMask got = grid_ground_truth(boxes, width, height, grid);
        const GridMask expected = oracle::grid_mask_ref(boxes, width, height, grid);
        REQUIRE(got.cells.size() == expected.cells.size());
        for (std::size_t i = 0; i < got.cells.size(); ++i) {
            CHECK(got.cells[i] == expected.cells[i]);
        }
    }
}

TEST_CASE("prf: perfect prediction") {
    const GridMask gt = grid_ground_truth({Box{0, 0, 40, 40}, Box{40, 40, 40, 40}}, 80, 80, 40);
    const GridReport report = prf(gt, gt);
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.f1 == 1.0);
}

TEST_CASE("prf: all-positive prediction against a half-positive truth") {
    GridMask gt;
    gt.grid_size = 10;
    gt.rows = 2;
    gt.cols = 2;
    gt.cells = {1, 1, 0, 0};
    GridMask pred = gt;
    pred.cells = {1, 1, 1, 1};
    const GridReport report = prf(gt, pred);
    CHECK(report.precision == doctest::Approx(0.5));
    CHECK(report.recall == doctest::Approx(1.0));
    CHECK(report.f1 == doctest::Approx(2.0 / 3.0));
    CHECK(report.tp + report.fp == 4);
    CHECK(report.tp + report.fn == 2);
}

TEST_CASE("prf: all-negative prediction against a non-empty truth") {
    GridMask gt;
    gt.grid_size = 10;
    gt.rows = 1;
    gt.cols = 3;
    gt.cells = {1, 0, 1};
    GridMask pred = gt;
    pred.cells = {0, 0, 0};
    const GridReport report = prf(gt, pred);
    CHECK(report.recall == 0.0);
    CHECK(report.f1 == 0.0);
    CHECK(report.precision == 1.0);  // vacuous: nothing predicted
}

TEST_CASE("prf: shape mismatch is rejected") {
    GridMask a;
    a.rows = 1;
    a.cols = 2;
    a.cells = {0, 0};
    GridMask b;
    b.rows = 2;
    b.cols = 1;
    b.cells = {0, 0};
    CHECK_THROWS_AS(prf(a, b), std::invalid_argument);
}

TEST_CASE("iou: identical, disjoint, and one-third overlap") {
    const Box a{0, 0, 2, 2};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, Box{10, 10, 2, 2}) == 0.0);
    CHECK(iou(a, Box{1, 0, 2, 2}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("nms: single box survives") {
    const std::vector<ScoredBox> kept = nms({{Box{0, 0, 4, 4}, 0.5}}, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].box == Box{0, 0, 4, 4});
}

TEST_CASE("nms: duplicate boxes keep only the higher score") {
    const std::vector<ScoredBox> kept = nms({{Box{0, 0, 4, 4}, 0.8}, {Box{0, 0, 4, 4}, 0.9}}, 0.5);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].score == 0.9);
}

TEST_CASE("nms: random candidate sets match the scan-based oracle") {
    std::mt19937_64 rng(4242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<ScoredBox> candidates;
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            candidates.push_back(ScoredBox{Box{static_cast<double>(rng() % 30), static_cast<double>(rng() % 30),
                                               static_cast<double>(4 + rng() % 12),
                                               static_cast<double>(4 + rng() % 12)},
                                           unit(rng)});
        }
        const double threshold = 0.2 + 0.6 * unit(rng);
        CHECK(same_boxes(nms(candidates, threshold), oracle::nms_ref(candidates, threshold)));
    }
}

TEST_CASE("nms: kept set is an antichain under the IoU relation") {
    std::mt19937_64 rng(616);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<ScoredBox> candidates;
        for (int i = 0; i < 12; ++i) {
            candidates.push_back(ScoredBox{Box{static_cast<double>(rng() % 40), static_cast<double>(rng() % 40),
                                               static_cast<double>(6 + rng() % 10),
                                               static_cast<double>(6 + rng() % 10)},
                                           unit(rng)});
        }
        const double threshold = 0.3;
        const auto kept = nms(candidates, threshold);
        for (std::size_t i = 0; i < kept.size(); ++i) {
            for (std::size_t j = i + 1; j < kept.size(); ++j) {
                CHECK(iou(kept[i].box, kept[j].box) <= threshold);
            }
        }
    }
}

TEST_CASE("average_precision: perfect detector scores 1") {
    const std::vector<Box> gt{{0, 0, 10, 10}, {20, 0, 10, 10}, {40, 0, 10, 10}};
    std::vector<ScoredBox> det;
    for (const Box& b : gt) {
        det.push_back(ScoredBox{b, 0.7});
    }
    CHECK(average_precision(det, gt) == doctest::Approx(1.0));
}

TEST_CASE("average_precision: no detections scores 0") {
    CHECK(average_precision({}, {Box{0, 0, 10, 10}}) == 0.0);
}

TEST_CASE("average_precision: empty ground truth is 0 with a warning") {
    CHECK(average_precision({{Box{0, 0, 10, 10}, 0.9}}, {}) == 0.0);
}

TEST_CASE("average_precision: top-scored false positive, hand-walked curve") {
    // PR points: (0, 0), (1/3, 1/2), (2/3, 2/3), (1, 3/4); envelope is 3/4
    // everywhere, so AP = 3/4.
    const std::vector<Box> gt{{0, 0, 10, 10}, {20, 0, 10, 10}, {40, 0, 10, 10}};
    const std::vector<ScoredBox> det{{Box{100, 100, 10, 10}, 0.9},
                                     {Box{0, 0, 10, 10}, 0.8},
                                     {Box{20, 0, 10, 10}, 0.7},
                                     {Box{40, 0, 10, 10}, 0.6}};
    CHECK(average_precision(det, gt) == doctest::Approx(0.75));
}

TEST_CASE("average_precision: false positive between true positives, hand-walked") {
    // points: (1/2, 1), (1/2, 1/2), (1, 2/3); AP = 1/2 * 1 + 1/2 * 2/3 = 5/6
    const std::vector<Box> gt{{0, 0, 10, 10}, {20, 0, 10, 10}};
    const std::vector<ScoredBox> det{{Box{0, 0, 10, 10}, 0.9},
                                     {Box{100, 0, 10, 10}, 0.8},
                                     {Box{20, 0, 10, 10}, 0.7}};
    CHECK(average_precision(det, gt) == doctest::Approx(5.0 / 6.0));
}

TEST_CASE("average_precision: duplicate of one truth box is penalized one-to-one") {
    // first detection matches, second duplicate is a false positive after
    // recall already reached 1, so AP stays 1
    const std::vector<Box> gt{{0, 0, 10, 10}};
    const std::vector<ScoredBox> det{{Box{0, 0, 10, 10}, 0.9}, {Box{0, 1, 10, 10}, 0.8}};
    CHECK(average_precision(det, gt) == doctest::Approx(1.0));
}

TEST_CASE("average_precision: removing a false positive never lowers AP") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::vector<Box> gt{{0, 0, 10, 10}, {30, 0, 10, 10}, {60, 0, 10, 10}};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ScoredBox> det;
        for (const Box& b : gt) {
            if (unit(rng) < 0.7) {
                det.push_back(ScoredBox{b, unit(rng)});
            }
        }
        int fp_index = -1;
        for (int i = 0; i < 3; ++i) {
            det.push_back(ScoredBox{Box{200.0 + 20 * i, 200, 10, 10}, unit(rng)});
            fp_index = static_cast<int>(det.size()) - 1;
        }
        const double with_fp = average_precision(det, gt);
        std::vector<ScoredBox> without = det;
        without.erase(without.begin() + fp_index);
        CHECK(average_precision(without, gt) >= with_fp - 1e-12);
    }
}

TEST_CASE("overlay rendering marks TP, FP, and FN cells") {
    Image base(40, 40, 1, 100);
    const GridMask gt = grid_ground_truth({Box{0, 0, 20, 20}, Box{20, 0, 20, 20}}, 40, 40, 20);
    const GridMask pred = grid_predictions({Window{0, 0, 20}, Window{0, 20, 20}}, 40, 40, 20);
    const GridReport report = prf(gt, pred);
    const Image overlay = render_overlay(base, report);
    CHECK(overlay.channels == 3);
    // TP cell (0,0): green boosted
    CHECK(overlay.at(5, 5, 1) > overlay.at(5, 5, 0));
    // FN cell (0,1): blue boosted
    CHECK(overlay.at(25, 5, 2) > overlay.at(25, 5, 1));
    // FP cell (1,0): red boosted
    CHECK(overlay.at(5, 25, 0) > overlay.at(5, 25, 1));
}
