#include "sard/image.hpp"

#include "sard/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sard {

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::size_t channels, float fill)
    : width_(width), height_(height), channels_(channels) {
    if (width == 0 || height == 0 || channels == 0) {
        throw InvalidArgument("ImageGrid: dimensions must be positive");
    }
    data_.assign(width * height * channels, fill);
}

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::size_t channels, std::vector<float> data)
    : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (width == 0 || height == 0 || channels == 0) {
        throw InvalidArgument("ImageGrid: dimensions must be positive");
    }
    if (data_.size() != width * height * channels) {
        throw InvalidArgument("ImageGrid: data length " + std::to_string(data_.size()) +
                              " does not match " + std::to_string(width) + "x" + std::to_string(height) +
                              "x" + std::to_string(channels));
    }
}

std::span<const float> ImageGrid::channel(std::size_t c) const {
    if (c >= channels_) throw InvalidArgument("ImageGrid: channel index out of range");
    return std::span<const float>(data_).subspan(c * plane_size(), plane_size());
}

std::span<float> ImageGrid::channel(std::size_t c) {
    if (c >= channels_) throw InvalidArgument("ImageGrid: channel index out of range");
    return std::span<float>(data_).subspan(c * plane_size(), plane_size());
}

void NormalizationParams::validate() const {
    if (!std::isfinite(min) || !std::isfinite(max)) {
        throw InvalidArgument("normalization: min/max must be finite");
    }
    if (max < min) throw InvalidArgument("normalization: max must be >= min");
    if (!(epsilon > 0.0)) throw InvalidArgument("normalization: epsilon must be positive");
}

void require_finite(const ImageGrid& img) {
    for (float v : img.data()) {
        if (!std::isfinite(v)) throw InvalidArgument("image contains non-finite values");
    }
}

float percentile_value(std::span<const float> values, double p) {
    if (values.empty()) throw InvalidArgument("percentile of an empty set");
    if (!(p > 0.0 && p <= 100.0)) throw InvalidArgument("percentile must lie in (0, 100]");
    std::vector<float> sorted(values.begin(), values.end());
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank - 1), sorted.end());
    return sorted[rank - 1];
}

ImageGrid clip_percentile(const ImageGrid& img, double p) {
    if (img.empty()) throw InvalidArgument("clip_percentile: empty image");
    require_finite(img);
    ImageGrid out = img;
    for (std::size_t c = 0; c < img.channels(); ++c) {
        const float ceiling = percentile_value(img.channel(c), p);
        for (float& v : out.channel(c)) v = std::min(v, ceiling);
    }
    return out;
}

ImageGrid clip_above(const ImageGrid& img, float ceiling) {
    require_finite(img);
    ImageGrid out = img;
    for (float& v : out.data()) v = std::min(v, ceiling);
    return out;
}

ImageGrid normalize(const ImageGrid& img, const NormalizationParams& params) {
    params.validate();
    ImageGrid out = img;
    const double scale = 1.0 / params.span();
    for (float& v : out.data()) v = static_cast<float>((static_cast<double>(v) - params.min) * scale);
    return out;
}

ImageGrid denormalize(const ImageGrid& img, const NormalizationParams& params) {
    params.validate();
    ImageGrid out = img;
    const double span = params.span();
    for (float& v : out.data()) v = static_cast<float>(static_cast<double>(v) * span + params.min);
    return out;
}

ImageGrid clamp_unit(const ImageGrid& img) {
    ImageGrid out = img;
    for (float& v : out.data()) v = std::clamp(v, 0.0f, 1.0f);
    return out;
}

ImageGrid sobel_gradient(const ImageGrid& img) {
    if (img.channels() != 1) throw InvalidArgument("sobel_gradient: single-channel input required");
    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    auto px = [&](std::ptrdiff_t x, std::ptrdiff_t y) -> double {
        x = std::clamp<std::ptrdiff_t>(x, 0, w - 1);
        y = std::clamp<std::ptrdiff_t>(y, 0, h - 1);
        return img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
    };
    ImageGrid out(img.width(), img.height(), 1);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const double gx = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x - 1, y) + px(x - 1, y + 1));
            const double gy = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)) -
                              (px(x - 1, y - 1) + 2.0 * px(x, y - 1) + px(x + 1, y - 1));
            out.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) =
                static_cast<float>(std::sqrt(gx * gx + gy * gy));
        }
    }
    return out;
}

std::vector<std::uint64_t> histogram(std::span<const float> values, std::size_t bins, double lo, double hi) {
    if (bins == 0) throw InvalidArgument("histogram: bins must be positive");
    if (!(hi > lo)) throw InvalidArgument("histogram: range must satisfy hi > lo");
    std::vector<std::uint64_t> counts(bins, 0);
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (float v : values) {
        if (!std::isfinite(v)) throw InvalidArgument("histogram: non-finite value");
        const double pos = std::floor((static_cast<double>(v) - lo) * scale);
        const double idx = std::clamp(pos, 0.0, static_cast<double>(bins - 1));
        ++counts[static_cast<std::size_t>(idx)];
    }
    return counts;
}

std::vector<std::uint64_t> histogram(const ImageGrid& img, std::size_t bins, double lo, double hi) {
    return histogram(img.data(), bins, lo, hi);
}

ImageGrid gaussian_blur(const ImageGrid& img, double sigma) {
    if (!(sigma > 0.0)) throw InvalidArgument("gaussian_blur: sigma must be positive");
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double k = std::exp(-0.5 * static_cast<double>(i * i) / (sigma * sigma));
        kernel[static_cast<std::size_t>(i + radius)] = k;
        total += k;
    }
    for (double& k : kernel) k /= total;

    const auto w = static_cast<std::ptrdiff_t>(img.width());
    const auto h = static_cast<std::ptrdiff_t>(img.height());
    ImageGrid out(img.width(), img.height(), img.channels());
    std::vector<double> tmp(img.plane_size());
    for (std::size_t c = 0; c < img.channels(); ++c) {
        const auto src = img.channel(c);
        auto dst = out.channel(c);
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
                    const auto xs = std::clamp<std::ptrdiff_t>(x + i, 0, w - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * src[static_cast<std::size_t>(y * w + xs)];
                }
                tmp[static_cast<std::size_t>(y * w + x)] = acc;
            }
        }
        for (std::ptrdiff_t y = 0; y < h; ++y) {
            for (std::ptrdiff_t x = 0; x < w; ++x) {
                double acc = 0.0;
                for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
                    const auto ys = std::clamp<std::ptrdiff_t>(y + i, 0, h - 1);
                    acc += kernel[static_cast<std::size_t>(i + radius)] * tmp[static_cast<std::size_t>(ys * w + x)];
                }
                dst[static_cast<std::size_t>(y * w + x)] = static_cast<float>(acc);
            }
        }
    }
    return out;
}

ImageGrid crop(const ImageGrid& img, const Rect& rect) {
    if (rect.width == 0 || rect.height == 0 || rect.x + rect.width > img.width() ||
        rect.y + rect.height > img.height()) {
        throw InvalidArgument("crop: rectangle outside image bounds");
    }
    ImageGrid out(rect.width, rect.height, img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = 0; y < rect.height; ++y) {
            for (std::size_t x = 0; x < rect.width; ++x) {
                out.at(x, y, c) = img.at(rect.x + x, rect.y + y, c);
            }
        }
    }
    return out;
}

} // namespace sard
