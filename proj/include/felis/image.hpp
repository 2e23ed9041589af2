#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace felis {

/// Interleaved RGB raster with channel values in [0,1], row-major.
class RgbImage {
public:
    static constexpr std::size_t kChannels = 3;

    RgbImage() = default;
    RgbImage(std::size_t height, std::size_t width, double fill = 0.0);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t pixel_count() const noexcept { return height_ * width_; }
    bool empty() const noexcept { return height_ == 0 || width_ == 0; }

    double& at(std::size_t row, std::size_t col, std::size_t channel) {
        return data_[(row * width_ + col) * kChannels + channel];
    }
    double at(std::size_t row, std::size_t col, std::size_t channel) const {
        return data_[(row * width_ + col) * kChannels + channel];
    }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(const RgbImage& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    /// Mean over the three channels at one pixel.
    double luminance(std::size_t row, std::size_t col) const;

    void clamp_unit();

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// Frames sharing one shape, sampled at frame_rate Hz.
struct FrameSequence {
    std::vector<RgbImage> frames;
    double frame_rate = 30.0;

    /// Throws InvalidInput when frames disagree in shape or the rate is not positive.
    void validate() const;
};

/// Dense optical flow in pixels per frame.
struct FlowField {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> u;
    std::vector<double> v;

    FlowField() = default;
    FlowField(std::size_t h, std::size_t w) : height(h), width(w), u(h * w, 0.0), v(h * w, 0.0) {}
};

}  // namespace felis
