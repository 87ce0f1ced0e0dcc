#include "sard/nn/tensor.hpp"

#include "sard/error.hpp"

namespace sard::nn {

template <typename T>
BasicTensor<T> to_tensor(std::span<const ImageGrid> images) {
    if (images.empty()) throw InvalidArgument("to_tensor: empty batch");
    const ImageGrid& first = images.front();
    BasicTensor<T> t(images.size(), first.height(), first.width(), first.channels());
    for (std::size_t i = 0; i < images.size(); ++i) {
        const ImageGrid& img = images[i];
        if (!img.same_shape(first)) throw InvalidArgument("to_tensor: images differ in shape");
        for (std::size_t c = 0; c < t.c; ++c) {
            for (std::size_t y = 0; y < t.h; ++y) {
                for (std::size_t x = 0; x < t.w; ++x) t.at(i, y, x, c) = static_cast<T>(img.at(x, y, c));
            }
        }
    }
    return t;
}

template <typename T>
ImageGrid to_image(const BasicTensor<T>& t, std::size_t i) {
    if (i >= t.n) throw InvalidArgument("to_image: index out of range");
    ImageGrid img(t.w, t.h, t.c);
    for (std::size_t c = 0; c < t.c; ++c) {
        for (std::size_t y = 0; y < t.h; ++y) {
            for (std::size_t x = 0; x < t.w; ++x) img.at(x, y, c) = static_cast<float>(t.at(i, y, x, c));
        }
    }
    return img;
}

template BasicTensor<float> to_tensor<float>(std::span<const ImageGrid>);
template BasicTensor<double> to_tensor<double>(std::span<const ImageGrid>);
template ImageGrid to_image<float>(const BasicTensor<float>&, std::size_t);
template ImageGrid to_image<double>(const BasicTensor<double>&, std::size_t);

} // namespace sard::nn
