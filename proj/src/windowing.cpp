#include "tggm/windowing.hpp"

#include <cmath>
#include <stdexcept>

namespace tggm {

bool point_in_polygon(const RoiPolygon& roi, double px, double py) {
    const auto& v = roi.vertices;
    const std::size_t n = v.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const auto [xi, yi] = v[i];
        const auto [xj, yj] = v[j];
        if ((yi > py) != (yj > py)) {
            const double x_cross = xj + (py - yj) / (yi - yj) * (xi - xj);
            if (px < x_cross) {
                inside = !inside;
            }
        }
    }
    return inside;
}

std::vector<Window> slide_windows(int image_width, int image_height, const RoiPolygon& roi, int size, int stride) {
    if (size <= 0 || size > image_width || size > image_height) {
        throw std::invalid_argument("slide_windows: window size must fit inside the image");
    }
    if (stride < 1) {
        throw std::invalid_argument("slide_windows: stride must be >= 1");
    }
    if (roi.vertices.size() < 3) {
        throw std::invalid_argument("slide_windows: ROI needs at least 3 vertices");
    }
    std::vector<Window> windows;
    const double half = size / 2.0;
    for (int y = 0; y + size <= image_height; y += stride) {
        for (int x = 0; x + size <= image_width; x += stride) {
            if (point_in_polygon(roi, x + half, y + half)) {
                windows.push_back(Window{x, y, size});
            }
        }
    }
    return windows;
}

Patch extract_patch(const Image& image, const Window& w) {
    if (w.size <= 0 || w.x < 0 || w.y < 0 || w.x + w.size > image.width || w.y + w.size > image.height) {
        throw std::invalid_argument("extract_patch: window out of image bounds");
    }
    Patch patch;
    patch.size = w.size;
    patch.channels = image.channels;
    patch.source = w;
    patch.pixels.reserve(static_cast<std::size_t>(w.size) * w.size * image.channels);
    for (int dy = 0; dy < w.size; ++dy) {
        for (int dx = 0; dx < w.size; ++dx) {
            for (int c = 0; c < image.channels; ++c) {
                patch.pixels.push_back(image.at(w.x + dx, w.y + dy, c) / 255.0);
            }
        }
    }
    return patch;
}

Patch rotate_patch(const Patch& p, int degrees) {
    int quarter_turns = ((degrees % 360) + 360) % 360;
    if (quarter_turns % 90 != 0) {
        throw std::invalid_argument("rotate_patch: angle must be a multiple of 90 degrees");
    }
    quarter_turns /= 90;
    Patch out = p;
    const int n = p.size;
    const int ch = p.channels;
    Patch cur = p;
    for (int t = 0; t < quarter_turns; ++t) {
        // (r, c) <- (c, n-1-r): one counter-clockwise quarter turn
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) {
                for (int k = 0; k < ch; ++k) {
                    out.pixels[(static_cast<std::size_t>(r) * n + c) * ch + k] =
                        cur.pixels[(static_cast<std::size_t>(c) * n + (n - 1 - r)) * ch + k];
                }
            }
        }
        std::swap(cur.pixels, out.pixels);
    }
    out.pixels = cur.pixels;
    return out;
}

AugmentResult augment_target(const Image& image, const Window& seed, const std::vector<int>& rotation_degrees,
                             const std::vector<std::pair<int, int>>& translations) {
    if (seed.x < 0 || seed.y < 0 || seed.x + seed.size > image.width || seed.y + seed.size > image.height) {
        throw std::invalid_argument("augment_target: seed window out of image bounds");
    }
    for (int deg : rotation_degrees) {
        if (((deg % 90) + 90) % 90 != 0) {
            throw std::invalid_argument("augment_target: rotations must be multiples of 90 degrees");
        }
    }
    AugmentResult result;
    for (int deg : rotation_degrees) {
        for (const auto& [dx, dy] : translations) {
            const Window moved{seed.x + dx, seed.y + dy, seed.size};
            if (moved.x < 0 || moved.y < 0 || moved.x + moved.size > image.width ||
                moved.y + moved.size > image.height) {
                ++result.skipped;
                continue;
            }
            result.patches.push_back(rotate_patch(extract_patch(image, moved), deg));
        }
    }
    return result;
}

}  // namespace tggm
