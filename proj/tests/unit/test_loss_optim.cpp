#include "helpers.hpp"
#include "nn_helpers.hpp"

#include "sard/error.hpp"
#include "sard/metrics.hpp"
#include "sard/nn/loss.hpp"
#include "sard/nn/optim.hpp"
#include "sard/nn/train.hpp"

#include <gtest/gtest.h>

using namespace sard;
using namespace sard::nn;

namespace {

double tv_oracle(const ImageGrid& img) {
    double s = 0.0;
    for (std::size_t c = 0; c < img.channels(); ++c)
        for (std::size_t y = 0; y + 1 < img.height(); ++y)
            for (std::size_t x = 0; x + 1 < img.width(); ++x) {
                const double dx = img.at(x + 1, y, c) - img.at(x, y, c);
                const double dy = img.at(x, y + 1, c) - img.at(x, y, c);
                s += std::sqrt(dx * dx + dy * dy);
            }
    return s;
}

} // namespace

TEST(Loss, EqualConstantImagesGiveZero) {
    const ImageGrid a(8, 8, 1, 0.4f);
    const LossTerms t = image_loss(a, a);
    EXPECT_NEAR(t.total, 0.0, 1e-12);
    EXPECT_NEAR(t.mse, 0.0, 1e-12);
}

TEST(Loss, MseOfZerosAgainstOnes) {
    const LossTerms t = image_loss(ImageGrid(2, 2, 1, 0.0f), ImageGrid(2, 2, 1, 1.0f), {1.0, 0.0, 0.0});
    EXPECT_DOUBLE_EQ(t.mse, 1.0);
    EXPECT_DOUBLE_EQ(t.total, 1.0);
}

TEST(Loss, TotalVariationOfRamp) {
    ImageGrid ramp(5, 2, 1);
    for (std::size_t y = 0; y < 2; ++y)
        for (std::size_t x = 0; x < 5; ++x) ramp.at(x, y) = static_cast<float>(x) / 4.0f;
    EXPECT_NEAR(total_variation(ramp), tv_oracle(ramp), 1e-12);
    EXPECT_NEAR(total_variation(ramp), 4 * 0.25, 1e-12);
}

TEST(Loss, TotalVariationMatchesOracle) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const ImageGrid img = test::random_image(9 + s, 7, 1 + s % 2, s);
        EXPECT_NEAR(total_variation(img), tv_oracle(img), 1e-8 * tv_oracle(img));
    }
}

TEST(Loss, TermsMatchMetrics) {
    const ImageGrid x = test::random_image(12, 10, 1, 1), t = test::random_image(12, 10, 1, 2);
    const LossTerms terms = image_loss(x, t, {2.0, 3.0, 0.5});
    double mse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mse += std::pow(static_cast<double>(x.data()[i]) - t.data()[i], 2);
    mse /= x.size();
    EXPECT_NEAR(terms.mse, mse, 1e-9);
    EXPECT_NEAR(terms.ssim, ssim(x, t), 1e-9);
    EXPECT_NEAR(terms.tv, tv_oracle(x), 1e-6);
    EXPECT_NEAR(terms.total, 2.0 * terms.mse + 3.0 * (1.0 - terms.ssim) + 0.5 * terms.tv, 1e-9);
}

TEST(Loss, NonNegativeProperty) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const ImageGrid x = test::random_image(8, 8, 1, s), t = test::random_image(8, 8, 1, s + 30);
        EXPECT_GE(image_loss(x, t).total, 0.0);
    }
}

TEST(Loss, ShapeMismatchRejected) {
    EXPECT_THROW(image_loss(ImageGrid(4, 4, 1), ImageGrid(4, 5, 1)), InvalidArgument);
}

TEST(Loss, FiniteDifferenceGradients) {
    std::mt19937_64 gen(3);
    const LossWeights variants[] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}, {1.0, 1.0, 1e-5}};
    for (const auto& w : variants) {
        for (int trial = 0; trial < 20; ++trial) {
            auto x = test::random_tensor<double>(2, 6, 7, 1, gen, 0.0, 1.0);
            const auto truth = test::random_tensor<double>(2, 6, 7, 1, gen, 0.0, 1.0);
            BasicTensor<double> grad;
            batch_loss(x, truth, w, &grad);
            double worst = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double keep = x.data[i];
                x.data[i] = keep + 1e-6;
                const double up = batch_loss(x, truth, w).total;
                x.data[i] = keep - 1e-6;
                const double down = batch_loss(x, truth, w).total;
                x.data[i] = keep;
                worst = std::max(worst, test::relative_error(grad.data[i], (up - down) / 2e-6));
            }
            EXPECT_LT(worst, 1e-4);
        }
    }
}

TEST(Loss, TvGradientFiniteOnFlatImage) {
    const BasicTensor<double> x(1, 5, 5, 1, 0.5), truth(1, 5, 5, 1, 0.5);
    BasicTensor<double> grad;
    batch_loss(x, truth, LossWeights{1.0, 1.0, 1.0}, &grad);
    for (double g : grad.data) EXPECT_TRUE(std::isfinite(g));
}

TEST(Adam, ZeroGradientLeavesParameters) {
    Adam<float> adam(4);
    std::vector<float> p{1, 2, 3, 4};
    const auto before = p;
    adam.step(p, std::vector<float>(4, 0.0f), 0.1);
    EXPECT_EQ(p, before);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    Adam<double> adam(1);
    std::vector<double> p{0.0};
    adam.step(p, {1.0}, 0.1);
    EXPECT_NEAR(p[0], -0.1, 1e-6);
    EXPECT_EQ(adam.steps(), 1u);
}

TEST(Adam, MatchesReferenceRecurrence) {
    Adam<double> adam(2);
    std::vector<double> p{0.5, -0.25};
    double m[2] = {0, 0}, v[2] = {0, 0}, q[2] = {0.5, -0.25};
    for (int t = 1; t <= 5; ++t) {
        const std::vector<double> g{0.3 * t, -0.1 / t};
        adam.step(p, g, 0.01);
        for (int i = 0; i < 2; ++i) {
            m[i] = 0.9 * m[i] + 0.1 * g[i];
            v[i] = 0.999 * v[i] + 0.001 * g[i] * g[i];
            const double mh = m[i] / (1 - std::pow(0.9, t)), vh = v[i] / (1 - std::pow(0.999, t));
            q[i] -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
        }
    }
    EXPECT_NEAR(p[0], q[0], 1e-12);
    EXPECT_NEAR(p[1], q[1], 1e-12);
}

TEST(Adam, DeterministicAcrossRuns) {
    auto run = [] {
        Adam<float> adam(3);
        std::vector<float> p{0.1f, 0.2f, 0.3f};
        for (int t = 0; t < 3; ++t) adam.step(p, {0.5f, -0.25f, 0.125f * t}, 0.002);
        return p;
    };
    EXPECT_EQ(run(), run());
}

TEST(Adam, NonFiniteGradientNamesTheBlock) {
    Adam<float> adam(4);
    std::vector<float> p{1, 2, 3, 4};
    const std::vector<ParamBlock> blocks{{"head.weight", 0, 2}, {"tail.bias", 2, 2}};
    try {
        adam.step(p, {0.0f, 0.0f, 0.0f, std::numeric_limits<float>::quiet_NaN()}, 0.1, blocks);
        FAIL() << "expected DivergenceError";
    } catch (const DivergenceError& e) {
        EXPECT_EQ(e.layer(), "tail.bias");
    }
    EXPECT_EQ(p, (std::vector<float>{1, 2, 3, 4}));
}

TEST(Schedule, StepDecayExamples) {
    const TrainConfig cfg;
    for (std::size_t e = 0; e < 5; ++e) EXPECT_DOUBLE_EQ(lr_at(e, cfg), 0.002);
    EXPECT_NEAR(lr_at(5, cfg), 0.0016, 1e-15);
    EXPECT_NEAR(lr_at(49, cfg), 0.002 * std::pow(0.8, 9), 1e-15);
    EXPECT_NEAR(lr_at(49, cfg), 2.684e-4, 1e-7);
}

TEST(Schedule, NonIncreasingAndPiecewiseConstant) {
    const TrainConfig cfg;
    for (std::size_t e = 1; e < 100; ++e) {
        EXPECT_LE(lr_at(e, cfg), lr_at(e - 1, cfg));
        if (e % cfg.decay_step != 0) EXPECT_EQ(lr_at(e, cfg), lr_at(e - 1, cfg));
    }
    EXPECT_THROW(step_decay_lr(1, 0.1, 0.5, 0), InvalidArgument);
}
