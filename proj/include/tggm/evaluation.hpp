#pragma once

#include <vector>

#include "tggm/windowing.hpp"

namespace tggm {

struct Box {
    double x = 0.0;
    double y = 0.0;
    double width = 0.0;
    double height = 0.0;

    double area() const { return width * height; }
    bool operator==(const Box&) const = default;
};

struct ScoredBox {
    Box box;
    double score = 0.0;
};

// Non-overlapping grid cells over an image; edge cells are clipped.
struct GridMask {
    int grid_size = 0;
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> cells;  // row-major booleans

    bool at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c] != 0; }
    void set(int r, int c, bool v) { cells[static_cast<std::size_t>(r) * cols + c] = v ? 1 : 0; }
    int count() const;
};

struct GridReport {
    int grid_size = 0;
    double precision = 1.0;
    double recall = 1.0;
    double f1 = 0.0;
    long tp = 0;
    long fp = 0;
    long fn = 0;
    GridMask gt_mask;
    GridMask pred_mask;
};

// A cell is positive iff some box overlaps it by at least half the box area
// or half the (clipped) cell area.
GridMask grid_ground_truth(const std::vector<Box>& boxes, int image_width, int image_height, int grid_size);

// Same 50% rule with detected windows in place of ground-truth boxes.
GridMask grid_predictions(const std::vector<Window>& detected, int image_width, int image_height, int grid_size);

// Cellwise confusion counts. Zero-denominator precision/recall are defined
// as 1 so empty scenes do not produce NaNs; the raw counts are kept.
GridReport prf(const GridMask& gt, const GridMask& pred);

double iou(const Box& a, const Box& b);

// Greedy: keep the best remaining box, drop everything with IoU strictly
// above the threshold against it. Ties break on lower x, then lower y.
std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_threshold);

// Greedy one-to-one matching at IoU >= threshold in score order, then the
// all-points interpolated area under the precision-recall curve.
double average_precision(const std::vector<ScoredBox>& detections, const std::vector<Box>& gt_boxes,
                         double iou_threshold = 0.5);

// Cell colors blended over the image: green = true positive, red = false
// positive, blue = false negative.
Image render_overlay(const Image& base, const GridReport& report);

}  // namespace tggm
