#pragma once

#include "sard/image.hpp"
#include "sard/nn/tensor.hpp"

namespace sard::nn {

struct LossWeights {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1e-5;
};

/// Per-image averages of the three terms and of the weighted total.
struct LossTerms {
    double mse = 0.0;
    double ssim = 0.0;
    double tv = 0.0;
    double total = 0.0;
};

/// L = alpha MSE + beta (1 - SSIM) + gamma TV for every image of the batch, averaged over
/// the batch.
///
/// MSE is the mean over all pixels and channels; SSIM uses whole-image statistics with
/// dynamic range 1, k1 = 0.01, k2 = 0.03; TV is the sum of sqrt(dx^2 + dy^2) over every
/// site with both forward differences inside the image. When `grad` is given it receives
/// dL/dx; the TV derivative divides by max(sqrt(.), 1e-8).
template <typename T>
LossTerms batch_loss(const BasicTensor<T>& x, const BasicTensor<T>& truth, const LossWeights& weights,
                     BasicTensor<T>* grad = nullptr);

/// Single-image convenience wrapper over batch_loss.
LossTerms image_loss(const ImageGrid& x, const ImageGrid& truth, const LossWeights& weights = {});

/// The TV term alone of a single image.
double total_variation(const ImageGrid& img);

} // namespace sard::nn
