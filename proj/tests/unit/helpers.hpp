#pragma once

#include "sard/image.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace sard::test {

inline ImageGrid random_image(std::size_t w, std::size_t h, std::size_t c, std::uint64_t seed, float lo = 0.0f,
                              float hi = 1.0f) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<float> dist(lo, hi);
    ImageGrid img(w, h, c);
    for (float& v : img.data()) v = dist(gen);
    return img;
}

inline ImageGrid step_image(std::size_t w, std::size_t h, std::size_t edge_x, float lo, float hi) {
    ImageGrid img(w, h, 1);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) img.at(x, y) = x < edge_x ? lo : hi;
    return img;
}

/// Replicated-border read.
inline float clamped(const ImageGrid& img, long x, long y, std::size_t c = 0) {
    const long w = static_cast<long>(img.width()), h = static_cast<long>(img.height());
    x = x < 0 ? 0 : (x >= w ? w - 1 : x);
    y = y < 0 ? 0 : (y >= h ? h - 1 : y);
    return img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y), c);
}

inline std::vector<float> to_vector(const ImageGrid& img) { return {img.data().begin(), img.data().end()}; }

inline double mean_of(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double variance_of(std::span<const float> v) {
    const double m = mean_of(v);
    double s = 0.0;
    for (float x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size());
}

} // namespace sard::test
