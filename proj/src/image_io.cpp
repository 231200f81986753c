#include "tggm/image_io.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tggm/errors.hpp"

namespace tggm {

Image load_png(const std::string& path) {
    cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
    if (mat.empty()) {
        throw SchemaError("cannot read image " + path);
    }
    if (mat.depth() != CV_8U) {
        mat.convertTo(mat, CV_8U);
    }
    if (mat.channels() == 4) {
        cv::cvtColor(mat, mat, cv::COLOR_BGRA2BGR);
    }
    if (mat.channels() == 3) {
        cv::cvtColor(mat, mat, cv::COLOR_BGR2RGB);
    } else if (mat.channels() != 1) {
        throw SchemaError(path + ": unsupported channel count");
    }
    Image img(mat.cols, mat.rows, mat.channels());
    for (int y = 0; y < mat.rows; ++y) {
        const std::uint8_t* row = mat.ptr<std::uint8_t>(y);
        std::copy(row, row + static_cast<std::size_t>(mat.cols) * mat.channels(),
                  img.data.begin() + static_cast<std::size_t>(y) * mat.cols * mat.channels());
    }
    return img;
}

void save_png(const Image& image, const std::string& path) {
    if (image.width <= 0 || image.height <= 0 || (image.channels != 1 && image.channels != 3)) {
        throw std::invalid_argument("save_png: image must be non-empty gray or RGB");
    }
    cv::Mat mat(image.height, image.width, image.channels == 1 ? CV_8UC1 : CV_8UC3);
    for (int y = 0; y < image.height; ++y) {
        std::uint8_t* row = mat.ptr<std::uint8_t>(y);
        std::copy(image.data.begin() + static_cast<std::size_t>(y) * image.width * image.channels,
                  image.data.begin() + static_cast<std::size_t>(y + 1) * image.width * image.channels, row);
    }
    if (image.channels == 3) {
        cv::cvtColor(mat, mat, cv::COLOR_RGB2BGR);
    }
    if (!cv::imwrite(path, mat)) {
        throw SchemaError("cannot write image " + path);
    }
}

}  // namespace tggm
