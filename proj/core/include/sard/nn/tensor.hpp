#pragma once

#include "sard/image.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sard::nn {

/// Dense N x H x W x C batch, channels last.
template <typename T>
struct BasicTensor {
    std::size_t n = 0;
    std::size_t h = 0;
    std::size_t w = 0;
    std::size_t c = 0;
    std::vector<T> data;

    BasicTensor() = default;
    BasicTensor(std::size_t n_, std::size_t h_, std::size_t w_, std::size_t c_, T fill = T(0))
        : n(n_), h(h_), w(w_), c(c_), data(n_ * h_ * w_ * c_, fill) {}

    /// Reshapes, keeping the allocation when it is large enough. Contents are unspecified.
    void resize(std::size_t n_, std::size_t h_, std::size_t w_, std::size_t c_) {
        n = n_;
        h = h_;
        w = w_;
        c = c_;
        data.resize(n * h * w * c);
    }

    std::size_t size() const noexcept { return data.size(); }
    std::size_t pixels() const noexcept { return h * w; }
    std::size_t image_size() const noexcept { return h * w * c; }
    bool same_shape(const BasicTensor& o) const noexcept { return n == o.n && h == o.h && w == o.w && c == o.c; }

    T* image(std::size_t i) noexcept { return data.data() + i * image_size(); }
    const T* image(std::size_t i) const noexcept { return data.data() + i * image_size(); }

    T& at(std::size_t i, std::size_t y, std::size_t x, std::size_t ch) { return data[((i * h + y) * w + x) * c + ch]; }
    T at(std::size_t i, std::size_t y, std::size_t x, std::size_t ch) const {
        return data[((i * h + y) * w + x) * c + ch];
    }
};

using Tensor = BasicTensor<float>;

/// Packs same-shaped planar images into one channels-last batch.
template <typename T>
BasicTensor<T> to_tensor(std::span<const ImageGrid> images);

/// Unpacks image i of a batch into a planar ImageGrid.
template <typename T>
ImageGrid to_image(const BasicTensor<T>& t, std::size_t i);

} // namespace sard::nn
