#include "sard/nn/layers.hpp"

#include "sard/error.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

namespace sard::nn {

template <>
void gemm<float>(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, float alpha,
                 const float* a, std::size_t lda, const float* b, std::size_t ldb, float beta, float* c,
                 std::size_t ldc) {
    cblas_sgemm(CblasRowMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), alpha, a, static_cast<int>(lda), b,
                static_cast<int>(ldb), beta, c, static_cast<int>(ldc));
}

// Plain loops rather than cblas_dgemm: OpenBLAS 0.3.20 selects a dgemm kernel on Cooper Lake
// CPUs that returns wrong products for many shapes. The double path only backs gradient checks.
template <>
void gemm<double>(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, double alpha,
                  const double* a, std::size_t lda, const double* b, std::size_t ldb, double beta, double* c,
                  std::size_t ldc) {
    std::vector<double> bt;
    if (trans_b) {
        bt.resize(k * n);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t q = 0; q < k; ++q) bt[q * n + j] = b[j * ldb + q];
        b = bt.data();
        ldb = n;
    }
    for (std::size_t i = 0; i < m; ++i) {
        double* row = c + i * ldc;
        if (beta == 0.0) {
            std::fill(row, row + n, 0.0);
        } else if (beta != 1.0) {
            for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
        }
        for (std::size_t q = 0; q < k; ++q) {
            const double s = alpha * (trans_a ? a[q * lda + i] : a[i * lda + q]);
            if (s == 0.0) continue;
            const double* brow = b + q * ldb;
            for (std::size_t j = 0; j < n; ++j) row[j] += s * brow[j];
        }
    }
}

template <typename T>
void im2col3x3(const T* image, std::size_t h, std::size_t w, std::size_t c, T* col) {
    const std::size_t k = 9 * c;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            T* row = col + (y * w + x) * k;
            for (std::size_t ky = 0; ky < 3; ++ky) {
                const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - 1;
                    T* dst = row + (ky * 3 + kx) * c;
                    if (sy < 0 || sx < 0 || sy >= static_cast<std::ptrdiff_t>(h) ||
                        sx >= static_cast<std::ptrdiff_t>(w)) {
                        std::fill(dst, dst + c, T(0));
                    } else {
                        std::memcpy(dst, image + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c,
                                    c * sizeof(T));
                    }
                }
            }
        }
    }
}

template <typename T>
void col2im3x3(const T* col, std::size_t h, std::size_t w, std::size_t c, T* image) {
    const std::size_t k = 9 * c;
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const T* row = col + (y * w + x) * k;
            for (std::size_t ky = 0; ky < 3; ++ky) {
                const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(y + ky) - 1;
                if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t kx = 0; kx < 3; ++kx) {
                    const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(x + kx) - 1;
                    if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(w)) continue;
                    const T* src = row + (ky * 3 + kx) * c;
                    T* dst = image + (static_cast<std::size_t>(sy) * w + static_cast<std::size_t>(sx)) * c;
                    for (std::size_t ch = 0; ch < c; ++ch) dst[ch] += src[ch];
                }
            }
        }
    }
}

template <typename T>
Conv3x3<T>::Conv3x3(std::size_t in_channels, std::size_t out_channels, std::size_t offset)
    : in_(in_channels), out_(out_channels), offset_(offset) {
    if (in_ == 0 || out_ == 0) throw InvalidArgument("Conv3x3: channel counts must be positive");
}

template <typename T>
void Conv3x3<T>::forward(const T* params, const BasicTensor<T>& in, BasicTensor<T>& out, std::vector<T>& col) const {
    if (in.c != in_) throw InvalidArgument("Conv3x3: input channel mismatch");
    const T* weights = params + offset_;
    const T* bias = weights + weight_count();
    const std::size_t p = in.pixels();
    const std::size_t k = 9 * in_;
    out.resize(in.n, in.h, in.w, out_);
    col.resize(p * k);
    for (std::size_t i = 0; i < in.n; ++i) {
        T* dst = out.image(i);
        for (std::size_t q = 0; q < p; ++q) std::memcpy(dst + q * out_, bias, out_ * sizeof(T));
        im2col3x3(in.image(i), in.h, in.w, in_, col.data());
        gemm<T>(false, false, p, out_, k, T(1), col.data(), k, weights, out_, T(1), dst, out_);
    }
}

template <typename T>
void Conv3x3<T>::backward(const T* params, T* grads, const BasicTensor<T>& in, const BasicTensor<T>& dout,
                          BasicTensor<T>* din, std::vector<T>& col) const {
    if (in.c != in_ || dout.c != out_ || in.n != dout.n || in.h != dout.h || in.w != dout.w) {
        throw InvalidArgument("Conv3x3: gradient shape mismatch");
    }
    const T* weights = params + offset_;
    T* dweights = grads + offset_;
    T* dbias = dweights + weight_count();
    const std::size_t p = in.pixels();
    const std::size_t k = 9 * in_;
    col.resize(p * k);
    if (din != nullptr) {
        din->resize(in.n, in.h, in.w, in_);
        std::fill(din->data.begin(), din->data.end(), T(0));
    }
    for (std::size_t i = 0; i < in.n; ++i) {
        const T* g = dout.image(i);
        for (std::size_t q = 0; q < p; ++q) {
            for (std::size_t o = 0; o < out_; ++o) dbias[o] += g[q * out_ + o];
        }
        im2col3x3(in.image(i), in.h, in.w, in_, col.data());
        gemm<T>(true, false, k, out_, p, T(1), col.data(), k, g, out_, T(1), dweights, out_);
        if (din != nullptr) {
            gemm<T>(false, true, p, k, out_, T(1), g, out_, weights, out_, T(0), col.data(), k);
            col2im3x3(col.data(), in.h, in.w, in_, din->image(i));
        }
    }
}

template <typename T>
BatchNorm<T>::BatchNorm(std::size_t channels, std::size_t offset, std::size_t buffer_offset, double momentum,
                        double eps)
    : c_(channels), offset_(offset), buffer_offset_(buffer_offset), momentum_(momentum), eps_(eps) {
    if (c_ == 0) throw InvalidArgument("BatchNorm: channel count must be positive");
    if (!(momentum >= 0.0 && momentum < 1.0) || !(eps > 0.0)) {
        throw InvalidArgument("BatchNorm: momentum must be in [0, 1) and eps positive");
    }
}

template <typename T>
void BatchNorm<T>::forward_train(const T* params, T* buffers, const BasicTensor<T>& in, BasicTensor<T>& out,
                                 BatchStats& stats) const {
    if (in.c != c_) throw InvalidArgument("BatchNorm: channel mismatch");
    const std::size_t m = in.n * in.pixels();
    if (m < 2) throw InvalidArgument("BatchNorm: training mode needs at least 2 values per channel");
    std::vector<double> sum(c_, 0.0), sq(c_, 0.0);
    for (std::size_t q = 0; q < m; ++q) {
        const T* v = in.data.data() + q * c_;
        for (std::size_t ch = 0; ch < c_; ++ch) sum[ch] += v[ch];
    }
    stats.mean.assign(c_, 0.0);
    stats.inv_std.assign(c_, 0.0);
    for (std::size_t ch = 0; ch < c_; ++ch) stats.mean[ch] = sum[ch] / static_cast<double>(m);
    for (std::size_t q = 0; q < m; ++q) {
        const T* v = in.data.data() + q * c_;
        for (std::size_t ch = 0; ch < c_; ++ch) {
            const double d = v[ch] - stats.mean[ch];
            sq[ch] += d * d;
        }
    }
    const T* gamma = params + offset_;
    const T* beta = gamma + c_;
    T* running_mean = buffers + buffer_offset_;
    T* running_var = running_mean + c_;
    std::vector<T> scale(c_), shift(c_);
    for (std::size_t ch = 0; ch < c_; ++ch) {
        const double var = sq[ch] / static_cast<double>(m);
        stats.inv_std[ch] = 1.0 / std::sqrt(var + eps_);
        scale[ch] = static_cast<T>(gamma[ch] * stats.inv_std[ch]);
        shift[ch] = static_cast<T>(beta[ch] - gamma[ch] * stats.inv_std[ch] * stats.mean[ch]);
        const double unbiased = sq[ch] / static_cast<double>(m - 1);
        running_mean[ch] = static_cast<T>(momentum_ * running_mean[ch] + (1.0 - momentum_) * stats.mean[ch]);
        running_var[ch] = static_cast<T>(momentum_ * running_var[ch] + (1.0 - momentum_) * unbiased);
    }
    out.resize(in.n, in.h, in.w, in.c);
    for (std::size_t q = 0; q < m; ++q) {
        const T* v = in.data.data() + q * c_;
        T* o = out.data.data() + q * c_;
        for (std::size_t ch = 0; ch < c_; ++ch) o[ch] = v[ch] * scale[ch] + shift[ch];
    }
}

template <typename T>
void BatchNorm<T>::forward_eval(const T* params, const T* buffers, const BasicTensor<T>& in,
                                BasicTensor<T>& out) const {
    if (in.c != c_) throw InvalidArgument("BatchNorm: channel mismatch");
    const T* gamma = params + offset_;
    const T* beta = gamma + c_;
    const T* running_mean = buffers + buffer_offset_;
    const T* running_var = running_mean + c_;
    std::vector<T> scale(c_), shift(c_);
    for (std::size_t ch = 0; ch < c_; ++ch) {
        const double inv_std = 1.0 / std::sqrt(static_cast<double>(running_var[ch]) + eps_);
        scale[ch] = static_cast<T>(gamma[ch] * inv_std);
        shift[ch] = static_cast<T>(beta[ch] - gamma[ch] * inv_std * running_mean[ch]);
    }
    out.resize(in.n, in.h, in.w, in.c);
    const std::size_t m = in.n * in.pixels();
    for (std::size_t q = 0; q < m; ++q) {
        const T* v = in.data.data() + q * c_;
        T* o = out.data.data() + q * c_;
        for (std::size_t ch = 0; ch < c_; ++ch) o[ch] = v[ch] * scale[ch] + shift[ch];
    }
}

template <typename T>
void BatchNorm<T>::backward(const T* params, T* grads, const BatchStats& stats, const BasicTensor<T>& in,
                            const BasicTensor<T>& dout, BasicTensor<T>& din) const {
    if (!in.same_shape(dout) || in.c != c_) throw InvalidArgument("BatchNorm: gradient shape mismatch");
    const std::size_t m = in.n * in.pixels();
    const T* gamma = params + offset_;
    T* dgamma = grads + offset_;
    T* dbeta = dgamma + c_;
    std::vector<double> sum_dy(c_, 0.0), sum_dy_xhat(c_, 0.0);
    for (std::size_t q = 0; q < m; ++q) {
        const T* v = in.data.data() + q * c_;
        const T* g = dout.data.data() + q * c_;
        for (std::size_t ch = 0; ch < c_; ++ch) {
            const double xhat = (v[ch] - stats.mean[ch]) * stats.inv_std[ch];
            sum_dy[ch] += g[ch];
            sum_dy_xhat[ch] += g[ch] * xhat;
        }
    }
    std::vector<double> a(c_), b(c_), mean_dy(c_);
    for (std::size_t ch = 0; ch < c_; ++ch) {
        dgamma[ch] += static_cast<T>(sum_dy_xhat[ch]);
        dbeta[ch] += static_cast<T>(sum_dy[ch]);
        // dx = gamma * inv_std * (dy - mean(dy) - xhat * mean(dy * xhat))
        a[ch] = gamma[ch] * stats.inv_std[ch];
        mean_dy[ch] = sum_dy[ch] / static_cast<double>(m);
        b[ch] = sum_dy_xhat[ch] / static_cast<double>(m);
    }
    din.resize(in.n, in.h, in.w, in.c);
    for (std::size_t q = 0; q < m; ++q) {
        const T* v = in.data.data() + q * c_;
        const T* g = dout.data.data() + q * c_;
        T* d = din.data.data() + q * c_;
        for (std::size_t ch = 0; ch < c_; ++ch) {
            const double xhat = (v[ch] - stats.mean[ch]) * stats.inv_std[ch];
            d[ch] = static_cast<T>(a[ch] * (g[ch] - mean_dy[ch] - xhat * b[ch]));
        }
    }
}

template <typename T>
void relu_inplace(BasicTensor<T>& t) {
    for (T& v : t.data) v = v > T(0) ? v : T(0);
}

template <typename T>
void relu_backward_inplace(const BasicTensor<T>& out, BasicTensor<T>& grad) {
    if (!out.same_shape(grad)) throw InvalidArgument("relu: gradient shape mismatch");
    for (std::size_t i = 0; i < grad.data.size(); ++i) {
        if (!(out.data[i] > T(0))) grad.data[i] = T(0);
    }
}

template void im2col3x3<float>(const float*, std::size_t, std::size_t, std::size_t, float*);
template void im2col3x3<double>(const double*, std::size_t, std::size_t, std::size_t, double*);
template void col2im3x3<float>(const float*, std::size_t, std::size_t, std::size_t, float*);
template void col2im3x3<double>(const double*, std::size_t, std::size_t, std::size_t, double*);
template class Conv3x3<float>;
template class Conv3x3<double>;
template class BatchNorm<float>;
template class BatchNorm<double>;
template void relu_inplace<float>(BasicTensor<float>&);
template void relu_inplace<double>(BasicTensor<double>&);
template void relu_backward_inplace<float>(const BasicTensor<float>&, BasicTensor<float>&);
template void relu_backward_inplace<double>(const BasicTensor<double>&, BasicTensor<double>&);

} // namespace sard::nn
