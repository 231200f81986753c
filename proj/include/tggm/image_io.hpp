#pragma once

#include <string>

#include "tggm/windowing.hpp"

namespace tggm {

// PNG in/out. Grayscale stays single channel; color becomes 3-channel RGB.
Image load_png(const std::string& path);
void save_png(const Image& image, const std::string& path);

}  // namespace tggm
