#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace sard {

/// W x H x C grid of 32-bit reals, channel-planar and row-major within a channel:
/// element (x, y, c) lives at ((c * H) + y) * W + x.
class ImageGrid {
public:
    ImageGrid() = default;
    ImageGrid(std::size_t width, std::size_t height, std::size_t channels, float fill = 0.0f);
    ImageGrid(std::size_t width, std::size_t height, std::size_t channels, std::vector<float> data);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t plane_size() const noexcept { return width_ * height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }
    std::span<const float> channel(std::size_t c) const;
    std::span<float> channel(std::size_t c);

    float at(std::size_t x, std::size_t y, std::size_t c = 0) const {
        return data_[(c * height_ + y) * width_ + x];
    }
    float& at(std::size_t x, std::size_t y, std::size_t c = 0) {
        return data_[(c * height_ + y) * width_ + x];
    }

    bool same_shape(const ImageGrid& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

private:
    std::size_t width_ = 0;
    std::size_t height_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

/// Min-max normalization constants. epsilon keeps the divisor away from zero when max == min.
struct NormalizationParams {
    double min = 0.0;
    double max = 1.0;
    double epsilon = 1e-6;

    void validate() const;
    double span() const noexcept { return (max - min) + epsilon; }
    friend bool operator==(const NormalizationParams&, const NormalizationParams&) = default;
};

/// Axis-aligned pixel rectangle.
struct Rect {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t width = 0;
    std::size_t height = 0;

    friend bool operator==(const Rect&, const Rect&) = default;
};

/// Throws InvalidArgument if any value is NaN or infinite.
void require_finite(const ImageGrid& img);

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value, p in (0, 100].
float percentile_value(std::span<const float> values, double p);

/// Per channel, replaces values above that channel's p-th percentile by the percentile.
ImageGrid clip_percentile(const ImageGrid& img, double p);

/// Replaces values above `ceiling` by `ceiling` (dataset-global clipping).
ImageGrid clip_above(const ImageGrid& img, float ceiling);

/// y = (x - min) / ((max - min) + epsilon)
ImageGrid normalize(const ImageGrid& img, const NormalizationParams& params);

/// x = y * ((max - min) + epsilon) + min
ImageGrid denormalize(const ImageGrid& img, const NormalizationParams& params);

/// Saturates every value into [0, 1].
ImageGrid clamp_unit(const ImageGrid& img);

/// Gradient magnitude sqrt(Hx^2 + Hy^2) with the 3x3 Sobel pair; borders replicate edge pixels.
/// Input must be single-channel.
ImageGrid sobel_gradient(const ImageGrid& img);

/// Fixed-range histogram. Values outside [lo, hi] fall into the nearest edge bin.
std::vector<std::uint64_t> histogram(std::span<const float> values, std::size_t bins, double lo, double hi);
std::vector<std::uint64_t> histogram(const ImageGrid& img, std::size_t bins, double lo, double hi);

/// Separable Gaussian blur per channel, kernel truncated at ceil(3 sigma), replicated borders.
ImageGrid gaussian_blur(const ImageGrid& img, double sigma);

/// Copies a rectangle (all channels).
ImageGrid crop(const ImageGrid& img, const Rect& rect);

} // namespace sard
