#pragma once

#include "sard/nn/tensor.hpp"

#include <cstddef>
#include <vector>

namespace sard::nn {

/// Row-major C = alpha op(A) op(B) + beta C on top of BLAS.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, T alpha, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T beta, T* c, std::size_t ldc);

/// 3x3 cross-correlation, stride 1, zero padding, channels last.
///
/// Parameters live in a flat array owned by the network: weights at `offset` as a
/// (9 * in) x out row-major matrix whose row index is (ky * 3 + kx) * in + ci, then the
/// `out` biases. Each image goes through im2col and one GEMM.
template <typename T>
class Conv3x3 {
public:
    Conv3x3(std::size_t in_channels, std::size_t out_channels, std::size_t offset);

    std::size_t in_channels() const noexcept { return in_; }
    std::size_t out_channels() const noexcept { return out_; }
    std::size_t offset() const noexcept { return offset_; }
    std::size_t weight_count() const noexcept { return 9 * in_ * out_; }
    std::size_t param_count() const noexcept { return weight_count() + out_; }

    void forward(const T* params, const BasicTensor<T>& in, BasicTensor<T>& out, std::vector<T>& col) const;

    /// Accumulates weight and bias gradients into `grads`; writes the input gradient when din is set.
    void backward(const T* params, T* grads, const BasicTensor<T>& in, const BasicTensor<T>& dout,
                  BasicTensor<T>* din, std::vector<T>& col) const;

private:
    std::size_t in_;
    std::size_t out_;
    std::size_t offset_;
};

/// Per-image (H*W) x (9*C) patch matrix of a channels-last image, zero padded.
template <typename T>
void im2col3x3(const T* image, std::size_t h, std::size_t w, std::size_t c, T* col);

/// Adjoint of im2col3x3: scatters the patch matrix back, adding into `image`.
template <typename T>
void col2im3x3(const T* col, std::size_t h, std::size_t w, std::size_t c, T* image);

/// Statistics of one training-mode batch, kept for the backward pass.
struct BatchStats {
    std::vector<double> mean;
    std::vector<double> inv_std;
};

/// Per-channel batch normalization over N*H*W. Parameters: gamma then beta at `offset`.
/// Buffers: running mean then running (unbiased) variance at `buffer_offset`.
template <typename T>
class BatchNorm {
public:
    BatchNorm(std::size_t channels, std::size_t offset, std::size_t buffer_offset, double momentum, double eps);

    std::size_t channels() const noexcept { return c_; }
    std::size_t offset() const noexcept { return offset_; }
    std::size_t buffer_offset() const noexcept { return buffer_offset_; }
    std::size_t param_count() const noexcept { return 2 * c_; }
    std::size_t buffer_count() const noexcept { return 2 * c_; }

    /// Batch statistics; requires N*H*W >= 2 and updates the running statistics.
    void forward_train(const T* params, T* buffers, const BasicTensor<T>& in, BasicTensor<T>& out,
                       BatchStats& stats) const;
    void forward_eval(const T* params, const T* buffers, const BasicTensor<T>& in, BasicTensor<T>& out) const;
    void backward(const T* params, T* grads, const BatchStats& stats, const BasicTensor<T>& in,
                  const BasicTensor<T>& dout, BasicTensor<T>& din) const;

private:
    std::size_t c_;
    std::size_t offset_;
    std::size_t buffer_offset_;
    double momentum_;
    double eps_;
};

template <typename T>
void relu_inplace(BasicTensor<T>& t);

/// grad *= (out > 0), with `out` the ReLU output.
template <typename T>
void relu_backward_inplace(const BasicTensor<T>& out, BasicTensor<T>& grad);

} // namespace sard::nn
