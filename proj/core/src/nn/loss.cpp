#include "sard/nn/loss.hpp"

#include "sard/error.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sard::nn {

namespace {

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;
constexpr double kTvFloor = 1e-8;

template <typename T>
double tv_term(const T* x, std::size_t h, std::size_t w, std::size_t c, T* grad, double scale) {
    double tv = 0.0;
    if (h < 2 || w < 2) return tv;
    for (std::size_t y = 0; y + 1 < h; ++y) {
        for (std::size_t xx = 0; xx + 1 < w; ++xx) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const std::size_t i = (y * w + xx) * c + ch;
                const std::size_t right = i + c;
                const std::size_t down = i + w * c;
                const double dx = static_cast<double>(x[right]) - x[i];
                const double dy = static_cast<double>(x[down]) - x[i];
                const double s = std::sqrt(dx * dx + dy * dy);
                tv += s;
                if (grad != nullptr) {
                    const double inv = scale / std::max(s, kTvFloor);
                    grad[right] += static_cast<T>(dx * inv);
                    grad[down] += static_cast<T>(dy * inv);
                    grad[i] -= static_cast<T>((dx + dy) * inv);
                }
            }
        }
    }
    return tv;
}

} // namespace

template <typename T>
LossTerms batch_loss(const BasicTensor<T>& x, const BasicTensor<T>& truth, const LossWeights& weights,
                     BasicTensor<T>* grad) {
    if (!x.same_shape(truth) || x.size() == 0) throw InvalidArgument("loss: shape mismatch");
    if (grad != nullptr) {
        grad->resize(x.n, x.h, x.w, x.c);
        std::fill(grad->data.begin(), grad->data.end(), T(0));
    }
    const std::size_t m = x.image_size();
    const double nm = static_cast<double>(m);
    const double inv_batch = 1.0 / static_cast<double>(x.n);
    LossTerms sum;
    for (std::size_t i = 0; i < x.n; ++i) {
        const T* a = x.image(i);
        const T* b = truth.image(i);
        T* g = grad != nullptr ? grad->image(i) : nullptr;

        double se = 0.0, ma = 0.0, mb = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double d = static_cast<double>(a[k]) - b[k];
            se += d * d;
            ma += a[k];
            mb += b[k];
        }
        ma /= nm;
        mb /= nm;
        double va = 0.0, vb = 0.0, cov = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double da = a[k] - ma, db = b[k] - mb;
            va += da * da;
            vb += db * db;
            cov += da * db;
        }
        va /= nm;
        vb /= nm;
        cov /= nm;
        const double p = 2.0 * ma * mb + kC1;
        const double q = 2.0 * cov + kC2;
        const double r = ma * ma + mb * mb + kC1;
        const double s = va + vb + kC2;
        const double ssim = (p * q) / (r * s);
        const double mse = se / nm;

        const double tv_scale = weights.gamma * inv_batch;
        const double tv = tv_term(a, x.h, x.w, x.c, g, tv_scale);

        if (g != nullptr) {
            // d(1 - SSIM)/da_k = -SSIM * (2 mb / (n p) + 2 (b_k - mb) / (n q) - 2 ma / (n r) - 2 (a_k - ma) / (n s))
            const double ks = -weights.beta * inv_batch * ssim * 2.0 / nm;
            const double kmse = weights.alpha * inv_batch * 2.0 / nm;
            const double common = mb / p - ma / r;
            for (std::size_t k = 0; k < m; ++k) {
                const double dssim = common + (b[k] - mb) / q - (a[k] - ma) / s;
                g[k] += static_cast<T>(kmse * (static_cast<double>(a[k]) - b[k]) + ks * dssim);
            }
        }
        sum.mse += mse;
        sum.ssim += ssim;
        sum.tv += tv;
        sum.total += weights.alpha * mse + weights.beta * (1.0 - ssim) + weights.gamma * tv;
    }
    sum.mse *= inv_batch;
    sum.ssim *= inv_batch;
    sum.tv *= inv_batch;
    sum.total *= inv_batch;
    return sum;
}

LossTerms image_loss(const ImageGrid& x, const ImageGrid& truth, const LossWeights& weights) {
    const std::vector<ImageGrid> a{x}, b{truth};
    return batch_loss(to_tensor<double>(a), to_tensor<double>(b), weights);
}

double total_variation(const ImageGrid& img) {
    const std::vector<ImageGrid> a{img};
    const auto t = to_tensor<double>(a);
    return tv_term<double>(t.data.data(), t.h, t.w, t.c, nullptr, 0.0);
}

template LossTerms batch_loss<float>(const BasicTensor<float>&, const BasicTensor<float>&, const LossWeights&,
                                     BasicTensor<float>*);
template LossTerms batch_loss<double>(const BasicTensor<double>&, const BasicTensor<double>&, const LossWeights&,
                                      BasicTensor<double>*);

} // namespace sard::nn
