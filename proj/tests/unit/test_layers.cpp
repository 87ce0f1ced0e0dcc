#include "helpers.hpp"
#include "nn_helpers.hpp"

#include "sard/error.hpp"
#include "sard/nn/layers.hpp"

#include <gtest/gtest.h>

using namespace sard;
using namespace sard::nn;

namespace {

constexpr int kTrials = 20;
constexpr double kStep = 1e-3;
constexpr double kTol = 1e-4;

/// Central differences of f with respect to every entry of `x`.
template <typename F>
std::vector<double> numeric_gradient(std::vector<double>& x, F f) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + kStep;
        const double up = f();
        x[i] = keep - kStep;
        const double down = f();
        x[i] = keep;
        g[i] = (up - down) / (2.0 * kStep);
    }
    return g;
}

double worst_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i) worst = std::max(worst, test::relative_error(analytic[i], numeric[i]));
    return worst;
}

} // namespace

TEST(Conv3x3, IdentityKernelCopiesInput) {
    Conv3x3<double> conv(2, 2, 0);
    std::vector<double> params(conv.param_count(), 0.0);
    for (std::size_t c = 0; c < 2; ++c) params[(4 * 2 + c) * 2 + c] = 1.0; // centre tap, ci == co
    std::mt19937_64 gen(1);
    const auto x = test::random_tensor<double>(2, 5, 6, 2, gen);
    BasicTensor<double> y;
    std::vector<double> col;
    conv.forward(params.data(), x, y, col);
    EXPECT_EQ(y.data, x.data);
}

TEST(Conv3x3, OnesKernelSumsNeighbourhood) {
    Conv3x3<double> conv(1, 1, 0);
    std::vector<double> params(conv.param_count(), 1.0);
    params.back() = 0.0;
    const BasicTensor<double> x(1, 6, 7, 1, 0.5);
    BasicTensor<double> y;
    std::vector<double> col;
    conv.forward(params.data(), x, y, col);
    EXPECT_DOUBLE_EQ(y.at(0, 3, 3, 0), 4.5);
    EXPECT_DOUBLE_EQ(y.at(0, 0, 0, 0), 2.0); // zero padding at the corner
    EXPECT_DOUBLE_EQ(y.at(0, 0, 3, 0), 3.0);
}

TEST(Conv3x3, MatchesDirectCorrelation) {
    std::mt19937_64 gen(2);
    Conv3x3<double> conv(3, 2, 0);
    const auto p = test::random_tensor<double>(1, 1, 1, conv.param_count(), gen).data;
    const auto x = test::random_tensor<double>(2, 4, 5, 3, gen);
    BasicTensor<double> y;
    std::vector<double> col;
    conv.forward(p.data(), x, y, col);
    for (std::size_t n = 0; n < 2; ++n)
        for (long i = 0; i < 4; ++i)
            for (long j = 0; j < 5; ++j)
                for (std::size_t co = 0; co < 2; ++co) {
                    double acc = p[conv.weight_count() + co];
                    for (long ky = 0; ky < 3; ++ky)
                        for (long kx = 0; kx < 3; ++kx) {
                            const long yy = i + ky - 1, xx = j + kx - 1;
                            if (yy < 0 || yy >= 4 || xx < 0 || xx >= 5) continue;
                            for (std::size_t ci = 0; ci < 3; ++ci)
                                acc += p[((ky * 3 + kx) * 3 + ci) * 2 + co] *
                                       x.at(n, static_cast<std::size_t>(yy), static_cast<std::size_t>(xx), ci);
                        }
                    EXPECT_NEAR(y.at(n, static_cast<std::size_t>(i), static_cast<std::size_t>(j), co), acc, 1e-12);
                }
}

TEST(Conv3x3, FiniteDifferenceGradients) {
    std::mt19937_64 gen(3);
    Conv3x3<double> conv(2, 3, 0);
    for (int trial = 0; trial < kTrials; ++trial) {
        auto params = test::random_tensor<double>(1, 1, 1, conv.param_count(), gen).data;
        auto x = test::random_tensor<double>(1, 4, 5, 2, gen);
        const auto g = test::random_tensor<double>(1, 4, 5, 3, gen);
        std::vector<double> col;
        auto loss = [&] {
            BasicTensor<double> y;
            std::vector<double> c;
            conv.forward(params.data(), x, y, c);
            return test::dot(y.data, g.data);
        };
        BasicTensor<double> y, dx;
        conv.forward(params.data(), x, y, col);
        std::vector<double> grads(conv.param_count(), 0.0);
        conv.backward(params.data(), grads.data(), x, g, &dx, col);
        EXPECT_LT(worst_error(grads, numeric_gradient(params, loss)), kTol);
        EXPECT_LT(worst_error(dx.data, numeric_gradient(x.data, loss)), kTol);
    }
}

TEST(Conv3x3, BackwardAccumulates) {
    std::mt19937_64 gen(4);
    Conv3x3<double> conv(1, 2, 0);
    const auto params = test::random_tensor<double>(1, 1, 1, conv.param_count(), gen).data;
    const auto x = test::random_tensor<double>(1, 3, 3, 1, gen);
    const auto g = test::random_tensor<double>(1, 3, 3, 2, gen);
    std::vector<double> col, once(conv.param_count(), 0.0), twice(conv.param_count(), 0.0);
    conv.backward(params.data(), once.data(), x, g, nullptr, col);
    conv.backward(params.data(), twice.data(), x, g, nullptr, col);
    conv.backward(params.data(), twice.data(), x, g, nullptr, col);
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice[i], 2.0 * once[i], 1e-12);
}

TEST(Im2col, AdjointIdentity) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t h = 3 + trial, w = 4 + trial, c = 1 + trial % 3;
        const auto x = test::random_tensor<double>(1, h, w, c, gen);
        const auto y = test::random_tensor<double>(1, h * w, 9 * c, 1, gen);
        std::vector<double> col(h * w * 9 * c);
        im2col3x3(x.data.data(), h, w, c, col.data());
        std::vector<double> back(x.size(), 0.0);
        col2im3x3(y.data.data(), h, w, c, back.data());
        EXPECT_NEAR(test::dot(col, y.data), test::dot(x.data, back), 1e-10);
    }
}

TEST(BatchNorm, StandardizesPerChannel) {
    std::mt19937_64 gen(6);
    BatchNorm<double> bn(3, 0, 0, 0.99, 1e-5);
    std::vector<double> params{1, 1, 1, 0, 0, 0}, buffers{0, 0, 0, 1, 1, 1};
    const auto x = test::random_tensor<double>(4, 6, 5, 3, gen, -3.0, 7.0);
    BasicTensor<double> y;
    BatchStats stats;
    bn.forward_train(params.data(), buffers.data(), x, y, stats);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        double s = 0.0, s2 = 0.0;
        const std::size_t m = y.size() / 3;
        for (std::size_t q = 0; q < m; ++q) s += y.data[q * 3 + ch];
        for (std::size_t q = 0; q < m; ++q) s2 += std::pow(y.data[q * 3 + ch] - s / m, 2);
        EXPECT_NEAR(s / m, 0.0, 1e-5);
        EXPECT_NEAR(s2 / m, 1.0, 1e-4);
    }
    params = {2, 2, 2, 3, 3, 3};
    bn.forward_train(params.data(), buffers.data(), x, y, stats);
    for (std::size_t ch = 0; ch < 3; ++ch) {
        double s = 0.0, s2 = 0.0;
        const std::size_t m = y.size() / 3;
        for (std::size_t q = 0; q < m; ++q) s += y.data[q * 3 + ch];
        for (std::size_t q = 0; q < m; ++q) s2 += std::pow(y.data[q * 3 + ch] - s / m, 2);
        EXPECT_NEAR(s / m, 3.0, 1e-5);
        EXPECT_NEAR(s2 / m, 4.0, 1e-3);
    }
}

TEST(BatchNorm, RunningStatisticsUpdate) {
    BatchNorm<double> bn(1, 0, 0, 0.9, 1e-5);
    std::vector<double> params{1, 0}, buffers{0, 1};
    BasicTensor<double> x(1, 1, 4, 1);
    x.data = {1, 2, 3, 6};
    BasicTensor<double> y;
    BatchStats stats;
    bn.forward_train(params.data(), buffers.data(), x, y, stats);
    const double mean = 3.0, unbiased = (4 + 1 + 0 + 9) / 3.0;
    EXPECT_NEAR(buffers[0], 0.1 * mean, 1e-12);
    EXPECT_NEAR(buffers[1], 0.9 + 0.1 * unbiased, 1e-12);
    BasicTensor<double> z;
    bn.forward_eval(params.data(), buffers.data(), x, z);
    EXPECT_NEAR(z.data[0], (1.0 - buffers[0]) / std::sqrt(buffers[1] + 1e-5), 1e-12);
}

TEST(BatchNorm, ZeroVarianceChannelStaysFinite) {
    BatchNorm<double> bn(1, 0, 0, 0.99, 1e-5);
    std::vector<double> params{1, 0}, buffers{0, 1};
    const BasicTensor<double> x(2, 3, 3, 1, 4.0);
    BasicTensor<double> y;
    BatchStats stats;
    bn.forward_train(params.data(), buffers.data(), x, y, stats);
    for (double v : y.data) EXPECT_EQ(v, 0.0);
    BasicTensor<double> dx;
    std::vector<double> grads(2, 0.0);
    bn.backward(params.data(), grads.data(), stats, x, BasicTensor<double>(2, 3, 3, 1, 1.0), dx);
    for (double v : dx.data) EXPECT_TRUE(std::isfinite(v));
}

TEST(BatchNorm, SingleValueBatchRejected) {
    BatchNorm<double> bn(2, 0, 0, 0.99, 1e-5);
    std::vector<double> params{1, 1, 0, 0}, buffers{0, 0, 1, 1};
    BasicTensor<double> y;
    BatchStats stats;
    EXPECT_THROW(bn.forward_train(params.data(), buffers.data(), BasicTensor<double>(1, 1, 1, 2), y, stats),
                 InvalidArgument);
    EXPECT_THROW(BatchNorm<double>(2, 0, 0, 1.0, 1e-5), InvalidArgument);
}

TEST(BatchNorm, FiniteDifferenceGradients) {
    std::mt19937_64 gen(7);
    BatchNorm<double> bn(3, 0, 0, 0.99, 1e-5);
    for (int trial = 0; trial < kTrials; ++trial) {
        auto params = test::random_tensor<double>(1, 1, 1, 6, gen, 0.5, 2.0).data;
        std::vector<double> buffers{0, 0, 0, 1, 1, 1};
        auto x = test::random_tensor<double>(2, 3, 4, 3, gen, -2.0, 2.0);
        const auto g = test::random_tensor<double>(2, 3, 4, 3, gen);
        auto loss = [&] {
            BasicTensor<double> y;
            BatchStats s;
            bn.forward_train(params.data(), buffers.data(), x, y, s);
            return test::dot(y.data, g.data);
        };
        BasicTensor<double> y, dx;
        BatchStats stats;
        bn.forward_train(params.data(), buffers.data(), x, y, stats);
        std::vector<double> grads(6, 0.0);
        bn.backward(params.data(), grads.data(), stats, x, g, dx);
        EXPECT_LT(worst_error(grads, numeric_gradient(params, loss)), kTol);
        EXPECT_LT(worst_error(dx.data, numeric_gradient(x.data, loss)), kTol);
    }
}

TEST(Relu, FiniteDifferenceGradients) {
    std::mt19937_64 gen(8);
    for (int trial = 0; trial < kTrials; ++trial) {
        auto x = test::random_tensor<double>(1, 4, 5, 2, gen);
        for (auto& v : x.data) v += v >= 0 ? 0.01 : -0.01; // keep clear of the kink
        const auto g = test::random_tensor<double>(1, 4, 5, 2, gen);
        auto loss = [&] {
            auto y = x;
            relu_inplace(y);
            return test::dot(y.data, g.data);
        };
        auto y = x;
        relu_inplace(y);
        auto dx = g;
        relu_backward_inplace(y, dx);
        EXPECT_LT(worst_error(dx.data, numeric_gradient(x.data, loss)), kTol);
    }
}
