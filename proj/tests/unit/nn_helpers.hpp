#pragma once

#include "sard/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace sard::test {

template <typename T>
nn::BasicTensor<T> random_tensor(std::size_t n, std::size_t h, std::size_t w, std::size_t c, std::mt19937_64& gen,
                                 double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    nn::BasicTensor<T> t(n, h, w, c);
    for (auto& v : t.data) v = static_cast<T>(dist(gen));
    return t;
}

inline double relative_error(double analytic, double numeric) {
    const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    return std::abs(analytic - numeric) / scale;
}

template <typename T>
double dot(const std::vector<T>& a, const std::vector<T>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<double>(a[i]) * b[i];
    return s;
}

} // namespace sard::test
