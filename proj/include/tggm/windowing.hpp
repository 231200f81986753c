#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tggm/numerics.hpp"

namespace tggm {

// 8-bit image, row-major, interleaved channels (1 = gray, 3 = RGB).
struct Image {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<std::uint8_t> data;

    Image() = default;
    Image(int w, int h, int c, std::uint8_t fill = 0)
        : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

    std::uint8_t& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

// Simple polygon in pixel coordinates, implicitly closed.
struct RoiPolygon {
    std::vector<std::pair<double, double>> vertices;
};

// Even-odd (ray crossing) point-in-polygon test.
bool point_in_polygon(const RoiPolygon& roi, double px, double py);

// Square window by its top-left corner.
struct Window {
    int x = 0;
    int y = 0;
    int size = 0;

    bool operator==(const Window&) const = default;
};

// Flattened normalized pixels of one window, with provenance.
struct Patch {
    Vec pixels;  // row-major, interleaved, values in [0, 1]
    int size = 0;
    int channels = 1;
    std::optional<Window> source;
};

// Every stride-lattice window that fits in the image and whose center lies
// inside the ROI. Row-major order (y outer, x inner); empty ROIs give an
// empty list, not an error.
std::vector<Window> slide_windows(int image_width, int image_height, const RoiPolygon& roi, int size, int stride);

Patch extract_patch(const Image& image, const Window& w);

struct AugmentResult {
    std::vector<Patch> patches;
    int skipped = 0;  // rotation x translation combinations whose window left the image
};

// Cartesian product of rotations x translations: translate the window,
// re-extract, then rotate the patch. Angles must be multiples of 90 degrees
// so no interpolation happens.
AugmentResult augment_target(const Image& image, const Window& seed, const std::vector<int>& rotation_degrees,
                             const std::vector<std::pair<int, int>>& translations);

// Counter-clockwise right-angle rotation of a square patch.
Patch rotate_patch(const Patch& p, int degrees);

}  // namespace tggm
