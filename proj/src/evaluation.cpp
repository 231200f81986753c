#include "tggm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

namespace tggm {

int GridMask::count() const {
    int n = 0;
    for (auto c : cells) {
        n += c != 0;
    }
    return n;
}

namespace {

GridMask empty_mask(int image_width, int image_height, int grid_size) {
    if (grid_size < 1) {
        throw std::invalid_argument("grid mask: grid_size must be >= 1");
    }
    GridMask mask;
    mask.grid_size = grid_size;
    mask.rows = (image_height + grid_size - 1) / grid_size;
    mask.cols = (image_width + grid_size - 1) / grid_size;
    mask.cells.assign(static_cast<std::size_t>(mask.rows) * mask.cols, 0);
    return mask;
}

double overlap_1d(double a0, double a1, double b0, double b1) {
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

GridMask mark_boxes(const std::vector<Box>& boxes, int image_width, int image_height, int grid_size) {
    GridMask mask = empty_mask(image_width, image_height, grid_size);
    for (const Box& box : boxes) {
        if (box.width <= 0.0 || box.height <= 0.0) {
            continue;
        }
        const int r0 = std::max(0, static_cast<int>(std::floor(box.y / grid_size)));
        const int r1 = std::min(mask.rows - 1, static_cast<int>(std::floor((box.y + box.height) / grid_size)));
        const int c0 = std::max(0, static_cast<int>(std::floor(box.x / grid_size)));
        const int c1 = std::min(mask.cols - 1, static_cast<int>(std::floor((box.x + box.width) / grid_size)));
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                const double cell_x0 = static_cast<double>(c) * grid_size;
                const double cell_y0 = static_cast<double>(r) * grid_size;
                const double cell_x1 = std::min<double>(cell_x0 + grid_size, image_width);
                const double cell_y1 = std::min<double>(cell_y0 + grid_size, image_height);
                const double cell_area = (cell_x1 - cell_x0) * (cell_y1 - cell_y0);
                const double overlap = overlap_1d(box.x, box.x + box.width, cell_x0, cell_x1) *
                                       overlap_1d(box.y, box.y + box.height, cell_y0, cell_y1);
                if (overlap >= 0.5 * box.area() || overlap >= 0.5 * cell_area) {
                    mask.set(r, c, true);
                }
            }
        }
    }
    return mask;
}

}  // namespace

GridMask grid_ground_truth(const std::vector<Box>& boxes, int image_width, int image_height, int grid_size) {
    return mark_boxes(boxes, image_width, image_height, grid_size);
}

GridMask grid_predictions(const std::vector<Window>& detected, int image_width, int image_height, int grid_size) {
    std::vector<Box> boxes;
    boxes.reserve(detected.size());
    for (const Window& w : detected) {
        boxes.push_back(Box{static_cast<double>(w.x), static_cast<double>(w.y), static_cast<double>(w.size),
                            static_cast<double>(w.size)});
    }
    return mark_boxes(boxes, image_width, image_height, grid_size);
}

GridReport prf(const GridMask& gt, const GridMask& pred) {
    if (gt.rows != pred.rows || gt.cols != pred.cols) {
        throw std::invalid_argument("prf: mask shapes differ");
    }
    GridReport report;
    report.grid_size = gt.grid_size;
    report.gt_mask = gt;
    report.pred_mask = pred;
    for (std::size_t i = 0; i < gt.cells.size(); ++i) {
        const bool g = gt.cells[i] != 0;
        const bool p = pred.cells[i] != 0;
        report.tp += g && p;
        report.fp += !g && p;
        report.fn += g && !p;
    }
    report.precision = (report.tp + report.fp == 0) ? 1.0 : static_cast<double>(report.tp) / (report.tp + report.fp);
    report.recall = (report.tp + report.fn == 0) ? 1.0 : static_cast<double>(report.tp) / (report.tp + report.fn);
    report.f1 = (report.precision + report.recall == 0.0)
                    ? 0.0
                    : 2.0 * report.precision * report.recall / (report.precision + report.recall);
    return report;
}

double iou(const Box& a, const Box& b) {
    const double inter = overlap_1d(a.x, a.x + a.width, b.x, b.x + b.width) *
                         overlap_1d(a.y, a.y + a.height, b.y, b.y + b.height);
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

bool score_order(const ScoredBox& a, const ScoredBox& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    if (a.box.x != b.box.x) {
        return a.box.x < b.box.x;
    }
    return a.box.y < b.box.y;
}

}  // namespace

std::vector<ScoredBox> nms(const std::vector<ScoredBox>& candidates, double iou_threshold) {
    std::vector<ScoredBox> sorted = candidates;
    std::stable_sort(sorted.begin(), sorted.end(), score_order);
    std::vector<ScoredBox> kept;
    for (const ScoredBox& cand : sorted) {
        bool suppressed = false;
        for (const ScoredBox& k : kept) {
            if (iou(cand.box, k.box) > iou_threshold) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) {
            kept.push_back(cand);
        }
    }
    return kept;
}

double average_precision(const std::vector<ScoredBox>& detections, const std::vector<Box>& gt_boxes,
                         double iou_threshold) {
    if (gt_boxes.empty()) {
        std::cerr << "average_precision: empty ground truth, AP defined as 0\n";
        return 0.0;
    }
    if (detections.empty()) {
        return 0.0;
    }
    std::vector<ScoredBox> sorted = detections;
    std::stable_sort(sorted.begin(), sorted.end(), score_order);

    std::vector<bool> matched(gt_boxes.size(), false);
    std::vector<double> precision;
    std::vector<double> recall;
    long tp = 0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        double best_iou = -1.0;
        int best = -1;
        for (std::size_t g = 0; g < gt_boxes.size(); ++g) {
            if (matched[g]) {
                continue;
            }
            const double v = iou(sorted[k].box, gt_boxes[g]);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0 && best_iou >= iou_threshold) {
            matched[best] = true;
            ++tp;
        }
        precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
        recall.push_back(static_cast<double>(tp) / static_cast<double>(gt_boxes.size()));
    }

    // precision envelope, then sum over recall increments
    for (std::size_t k = precision.size() - 1; k-- > 0;) {
        precision[k] = std::max(precision[k], precision[k + 1]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t k = 0; k < precision.size(); ++k) {
        ap += (recall[k] - prev_recall) * precision[k];
        prev_recall = recall[k];
    }
    return ap;
}

Image render_overlay(const Image& base, const GridReport& report) {
    Image out(base.width, base.height, 3);
    for (int y = 0; y < base.height; ++y) {
        for (int x = 0; x < base.width; ++x) {
            for (int c = 0; c < 3; ++c) {
                out.at(x, y, c) = base.channels == 1 ? base.at(x, y, 0) : base.at(x, y, c);
            }
        }
    }
    const int g = report.gt_mask.grid_size;
    for (int r = 0; r < report.gt_mask.rows; ++r) {
        for (int c = 0; c < report.gt_mask.cols; ++c) {
            const bool gt = report.gt_mask.at(r, c);
            const bool pred = report.pred_mask.at(r, c);
            if (!gt && !pred) {
                continue;
            }
            std::uint8_t color[3] = {0, 0, 0};
            if (gt && pred) {
                color[1] = 255;  // true positive
            } else if (pred) {
                color[0] = 255;  // false positive
            } else {
                color[2] = 255;  // false negative
            }
            const int y1 = std::min(base.height, (r + 1) * g);
            const int x1 = std::min(base.width, (c + 1) * g);
            for (int y = r * g; y < y1; ++y) {
                for (int x = c * g; x < x1; ++x) {
                    for (int k = 0; k < 3; ++k) {
                        out.at(x, y, k) = static_cast<std::uint8_t>((out.at(x, y, k) + color[k]) / 2);
                    }
                }
            }
        }
    }
    return out;
}

}  // namespace tggm
