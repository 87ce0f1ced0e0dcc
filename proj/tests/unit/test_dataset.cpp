#include "helpers.hpp"

#include "sard/dataset.hpp"
#include "sard/error.hpp"
#include "sard/metrics.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace sard;

TEST(TemporalAverage, IdenticalFramesReturnTheFrame) {
    const ImageGrid f = test::random_image(9, 7, 1, 1);
    TimeSeriesStack stack{{f, f, f, f}, 0.0, 0.0};
    const ImageGrid avg = temporal_average(stack);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_FLOAT_EQ(avg.data()[i], f.data()[i]);
}

TEST(TemporalAverage, ZerosAndTwosGiveOnes) {
    TimeSeriesStack stack{{ImageGrid(4, 4, 1, 0.0f), ImageGrid(4, 4, 1, 2.0f)}, 0.0, 0.0};
    for (float v : test::to_vector(temporal_average(stack))) EXPECT_EQ(v, 1.0f);
}

TEST(TemporalAverage, MatchesPerPixelOracle) {
    TimeSeriesStack stack;
    for (std::uint64_t t = 0; t < 8; ++t) stack.frames.push_back(test::random_image(13, 11, 2, 40 + t, 0.0f, 3.0f));
    const ImageGrid avg = temporal_average(stack);
    for (std::size_t i = 0; i < avg.size(); ++i) {
        long double s = 0.0L;
        for (std::size_t t = 8; t-- > 0;) s += stack.frames[t].data()[i];
        EXPECT_NEAR(avg.data()[i], static_cast<double>(s / 8.0L), 1e-6);
    }
}

TEST(TemporalAverage, RejectsEmptyAndMismatched) {
    EXPECT_THROW(temporal_average(TimeSeriesStack{}), InvalidArgument);
    TimeSeriesStack bad{{ImageGrid(4, 4, 1), ImageGrid(4, 5, 1)}, 0.0, 0.0};
    EXPECT_THROW(temporal_average(bad), InvalidArgument);
}

TEST(TemporalAverage, ResidualVarianceShrinksAsOneOverT) {
    const ImageGrid truth(64, 64, 1, 1.0f);
    for (std::size_t frames : {4u, 16u, 64u}) {
        const ImageGrid avg = temporal_average(synthetic_stack(truth, frames, 1, 1000 + frames));
        const double var = test::variance_of(avg.data());
        EXPECT_NEAR(var * static_cast<double>(frames), 1.0, 0.1) << frames;
    }
}

TEST(SynthesizePair, DeterministicAndTruthPreserved) {
    const ImageGrid truth = test::random_image(16, 16, 1, 2);
    SpeckleConfig cfg;
    cfg.seed = 123;
    const SamplePair a = synthesize_pair(truth, cfg);
    const SamplePair b = synthesize_pair(truth, cfg);
    EXPECT_EQ(a.input, b.input);
    EXPECT_EQ(a.truth, truth);
}

TEST(SynthesizePair, ConstantTruthGivesScaledGamma) {
    SpeckleConfig cfg;
    cfg.looks = 4;
    cfg.seed = 9;
    const SamplePair p = synthesize_pair(ImageGrid(500, 500, 1, 2.0f), cfg);
    std::vector<float> ratio(p.input.data().begin(), p.input.data().end());
    for (float& v : ratio) v /= 2.0f;
    EXPECT_NEAR(test::mean_of(ratio), 1.0, 0.01);
    EXPECT_NEAR(test::variance_of(ratio), 0.25, 0.01);
}

TEST(SynthesizePair, NoiselessModelIsIdentity) {
    const ImageGrid truth = test::random_image(16, 16, 1, 3);
    SpeckleConfig cfg;
    cfg.model = NoiseModel::GaussianAdditive;
    cfg.gauss_std = 0.0;
    EXPECT_EQ(synthesize_pair(truth, cfg).input, truth);
}

TEST(SynthesizePair, NegativeTruthRejected) {
    ImageGrid truth(4, 4, 1, 0.5f);
    truth.at(2, 2) = -0.1f;
    EXPECT_THROW(synthesize_pair(truth, SpeckleConfig{}), InvalidArgument);
}

TEST(Split, FloorRuleArithmetic) {
    const SplitSpec spec;
    const SplitIndices s = split_dataset(2637, spec);
    EXPECT_EQ(s.val.size(), static_cast<std::size_t>(std::floor(2637 * 0.228)));
    EXPECT_EQ(s.test.size(), static_cast<std::size_t>(std::floor(2637 * 0.014)));
    EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), 2637u);
    const SplitIndices h = split_dataset(100, spec);
    EXPECT_EQ(h.train.size(), 77u);
    EXPECT_EQ(h.val.size(), 22u);
    EXPECT_EQ(h.test.size(), 1u);
}

TEST(Split, PartitionPropertyForManyN) {
    for (std::size_t n = 3; n < 400; n += 7) {
        SplitSpec spec;
        spec.seed = n;
        const SplitIndices s = split_dataset(n, spec);
        std::set<std::size_t> all;
        for (const auto* part : {&s.train, &s.val, &s.test}) all.insert(part->begin(), part->end());
        EXPECT_EQ(all.size(), n);
        EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), n);
        EXPECT_EQ(*all.rbegin(), n - 1);
    }
}

TEST(Split, SeedDeterminism) {
    SplitSpec spec;
    spec.seed = 5;
    const SplitIndices a = split_dataset(500, spec), b = split_dataset(500, spec);
    EXPECT_EQ(a.val, b.val);
    EXPECT_EQ(a.test, b.test);
    spec.seed = 6;
    EXPECT_NE(split_dataset(500, spec).val, a.val);
}

TEST(Split, Rejections) {
    EXPECT_THROW(split_dataset(2, SplitSpec{}), InvalidArgument);
    SplitSpec bad{0.5, 0.3, 0.3, 0};
    EXPECT_THROW(split_dataset(10, bad), InvalidArgument);
}

TEST(Augment, FourQuarterTurnsAreIdentity) {
    const ImageGrid img = test::random_image(7, 5, 2, 4);
    ImageGrid r = img;
    for (int i = 0; i < 4; ++i) r = rotate90(r, 1);
    EXPECT_EQ(r, img);
    EXPECT_EQ(rotate90(img, -1), rotate90(img, 3));
    EXPECT_EQ(flip_horizontal(flip_horizontal(img)), img);
}

TEST(Augment, QuarterTurnIndexOracle) {
    const ImageGrid img = test::random_image(6, 4, 1, 8);
    const ImageGrid r = rotate90(img, 1);
    ASSERT_EQ(r.width(), 4u);
    ASSERT_EQ(r.height(), 6u);
    // Counter-clockwise: the top-right corner moves to the top-left.
    EXPECT_EQ(r.at(0, 0), img.at(5, 0));
    for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 6; ++x) EXPECT_EQ(r.at(y, 5 - x), img.at(x, y));
}

TEST(Augment, CropIndexOracle) {
    const ImageGrid input = test::random_image(96, 96, 1, 10);
    const ImageGrid truth = test::random_image(96, 96, 1, 11);
    const std::vector<AugmentOp> ops{AugmentOp::crop(8, 8, 64)};
    const SamplePair out = augment(SamplePair{input, truth, {}}, ops);
    ASSERT_EQ(out.input.width(), 64u);
    EXPECT_EQ(out.input.at(0, 0), input.at(8, 8));
    EXPECT_EQ(out.truth.at(0, 0), truth.at(8, 8));
    EXPECT_EQ(out.truth.at(63, 63), truth.at(71, 71));
    const std::vector<AugmentOp> outside{AugmentOp::crop(40, 40, 64)};
    EXPECT_THROW(augment(SamplePair{input, truth, {}}, outside), InvalidArgument);
}

TEST(Augment, CommutesWithMultiplicativeNoise) {
    const ImageGrid truth = test::random_image(24, 16, 1, 12);
    const ImageGrid field = sample_gamma_speckle(24, 16, 1, 4, 13);
    const std::vector<AugmentOp> ops{AugmentOp::rotate90(1), AugmentOp::flip(), AugmentOp::crop(2, 3, 10)};
    ImageGrid t = truth, f = field;
    for (const auto& op : ops) {
        t = apply_augment(t, op);
        f = apply_augment(f, op);
    }
    const SamplePair noisy{apply_multiplicative(truth, field), truth, {}};
    EXPECT_EQ(augment(noisy, ops).input, apply_multiplicative(t, f));
}

TEST(Clip, PerImageAndGlobalPolicies) {
    const ImageGrid img = test::random_image(20, 20, 1, 14, 0.0f, 4.0f);
    ClipPolicy per;
    EXPECT_EQ(apply_clip(img, per, ImageRole::Input), clip_percentile(img, 90.0));
    ClipPolicy global;
    global.scope = ClipPolicy::Scope::Global;
    global.input_ceiling = 2.0f;
    global.truth_ceiling = 3.0f;
    EXPECT_EQ(apply_clip(img, global, ImageRole::Input), clip_above(img, 2.0f));
    EXPECT_EQ(apply_clip(img, global, ImageRole::Truth), clip_above(img, 3.0f));
}

TEST(Clip, PrepareForModelLandsInUnitInterval) {
    const ImageGrid img = test::random_image(20, 20, 1, 15, 0.0f, 4.0f);
    const ImageGrid out = prepare_for_model(img, ClipPolicy{}, ImageRole::Input, {0.5, 2.0, 1e-6});
    for (float v : out.data()) {
        EXPECT_GE(v, 0.0f);
        EXPECT_LE(v, 1.0f);
    }
}

TEST(Normalization, CoversClippedPairs) {
    std::vector<SamplePair> pairs;
    for (std::uint64_t s = 0; s < 5; ++s) {
        SpeckleConfig cfg;
        cfg.seed = s;
        pairs.push_back(synthesize_pair(test::random_image(16, 16, 1, 50 + s, 0.1f, 1.0f), cfg));
    }
    const ClipPolicy policy;
    const NormalizationParams n = dataset_normalization(pairs, policy);
    double lo = 1e9, hi = -1e9;
    for (const auto& p : pairs) {
        for (const ImageGrid* img : {&p.input, &p.truth}) {
            const ImageGrid c = apply_clip(*img, policy, ImageRole::Input);
            for (float v : c.data()) {
                lo = std::min<double>(lo, v);
                hi = std::max<double>(hi, v);
            }
        }
    }
    EXPECT_DOUBLE_EQ(n.min, lo);
    EXPECT_DOUBLE_EQ(n.max, hi);
    EXPECT_THROW(dataset_normalization({}, policy), InvalidArgument);
}

TEST(SyntheticTruth, DeterministicPositiveAndVaried) {
    SyntheticFieldOptions o;
    const ImageGrid a = synthetic_truth(o, 3);
    EXPECT_EQ(a, synthetic_truth(o, 3));
    EXPECT_NE(a, synthetic_truth(o, 4));
    for (float v : a.data()) EXPECT_GT(v, 0.0f);
    EXPECT_GT(test::variance_of(a.data()), 0.0);
}

TEST(SyntheticTruth, EdgeRichHasStrongGradients) {
    const ImageGrid img = synthetic_truth(SyntheticFieldOptions::edge_rich(96), 1);
    const ImageGrid g = sobel_gradient(img);
    EXPECT_GT(*std::max_element(g.data().begin(), g.data().end()), 0.5f);
}
