#include "felis/image.hpp"

#include <algorithm>
#include <cmath>

#include "felis/error.hpp"

namespace felis {

RgbImage::RgbImage(std::size_t height, std::size_t width, double fill)
    : height_(height), width_(width), data_(height * width * kChannels, fill) {}

double RgbImage::luminance(std::size_t row, std::size_t col) const {
    const double* px = &data_[(row * width_ + col) * kChannels];
    return (px[0] + px[1] + px[2]) / 3.0;
}

void RgbImage::clamp_unit() {
    for (double& value : data_) {
        value = std::clamp(value, 0.0, 1.0);
    }
}

void FrameSequence::validate() const {
    if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
        throw InvalidInput("frame rate must be a positive finite number");
    }
    for (std::size_t i = 1; i < frames.size(); ++i) {
        if (!frames[i].same_shape(frames[0])) {
            throw InvalidInput("frame " + std::to_string(i) + " differs in shape from frame 0");
        }
    }
}

}  // namespace felis
