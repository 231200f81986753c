#pragma once

// Independent reference implementations used only by tests. Everything here
// recomputes results from first principles instead of calling the library
// code it checks.

#include <vector>

#include "tggm/evaluation.hpp"
#include "tggm/model.hpp"
#include "tggm/windowing.hpp"

namespace tggm::oracle {

bool point_in_polygon_ref(const RoiPolygon& roi, double px, double py);

std::vector<Window> slide_windows_ref(int image_width, int image_height, const RoiPolygon& roi, int size, int stride);

// Pixel-counting version of the 50% rule; boxes must have integer corners.
GridMask grid_mask_ref(const std::vector<Box>& boxes, int image_width, int image_height, int grid_size);

// Greedy NMS by repeated linear scans, no sorting.
std::vector<ScoredBox> nms_ref(const std::vector<ScoredBox>& candidates, double iou_threshold);

// Scalar two-layer forward pass, written separately from the library path.
Vec mlp_forward_ref(const LayerStack& net, const Vec& input);

double gaussian_log_density_ref(const Vec& x, const Vec& mean, const Vec& log_var);

// Straight-line ELBO evaluations following the factorized bound term by term.
double elbo_unlabeled_ref(const TggmModel& m, const Vec& x, const Vec& eps0, const Vec& eps1);
double elbo_labeled_ref(const TggmModel& m, const Vec& x, const Vec& eps);

}  // namespace tggm::oracle
