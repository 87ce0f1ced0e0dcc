#include "sard/dataset.hpp"

#include "sard/error.hpp"
#include "sard/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sard {

namespace {

constexpr std::uint32_t kSplitStream = 10;
constexpr std::uint32_t kFieldStream = 11;
constexpr std::uint32_t kShapeStream = 12;

} // namespace

void TimeSeriesStack::validate() const {
    if (frames.empty()) throw InvalidArgument("time series stack is empty");
    for (const auto& f : frames) {
        if (!f.same_shape(frames.front())) throw InvalidArgument("time series frames differ in dimensions");
    }
}

void SplitSpec::validate() const {
    if (train < 0.0 || val < 0.0 || test < 0.0) throw InvalidArgument("split fractions must be >= 0");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw InvalidArgument("split fractions must sum to 1");
}

void to_json(nlohmann::json& j, const SplitSpec& spec) {
    j = nlohmann::json{{"train", spec.train}, {"val", spec.val}, {"test", spec.test}, {"seed", spec.seed}};
}

void from_json(const nlohmann::json& j, SplitSpec& spec) {
    spec = SplitSpec{};
    if (j.contains("train")) j.at("train").get_to(spec.train);
    if (j.contains("val")) j.at("val").get_to(spec.val);
    if (j.contains("test")) j.at("test").get_to(spec.test);
    if (j.contains("seed")) j.at("seed").get_to(spec.seed);
}

ImageGrid temporal_average(const TimeSeriesStack& stack) {
    stack.validate();
    const auto& first = stack.frames.front();
    std::vector<double> acc(first.size(), 0.0);
    for (const auto& frame : stack.frames) {
        const auto d = frame.data();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
    }
    const double inv = 1.0 / static_cast<double>(stack.frames.size());
    ImageGrid out(first.width(), first.height(), first.channels());
    auto dst = out.data();
    for (std::size_t i = 0; i < acc.size(); ++i) dst[i] = static_cast<float>(acc[i] * inv);
    return out;
}

SamplePair synthesize_pair(const ImageGrid& truth, const SpeckleConfig& cfg) {
    for (float v : truth.data()) {
        if (!(v >= 0.0f)) throw InvalidArgument("synthesize_pair: truth must be nonnegative");
    }
    return SamplePair{apply_noise(truth, cfg), truth, cfg};
}

SplitIndices split_dataset(std::size_t n, const SplitSpec& spec) {
    spec.validate();
    if (n < 3) throw InvalidArgument("split_dataset: need at least 3 pairs, got " + std::to_string(n));
    const auto val_n = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val));
    const auto test_n = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test));
    const std::size_t train_n = n - val_n - test_n;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    CounterRng rng(spec.seed, kSplitStream, 0);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(static_cast<std::uint32_t>(i + 1)));
        std::swap(order[i], order[j]);
    }

    SplitIndices out;
    out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(train_n));
    out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(train_n),
                   order.begin() + static_cast<std::ptrdiff_t>(train_n + val_n));
    out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(train_n + val_n), order.end());
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.val.begin(), out.val.end());
    std::sort(out.test.begin(), out.test.end());
    return out;
}

ImageGrid rotate90(const ImageGrid& img, int k) {
    k = ((k % 4) + 4) % 4;
    if (k == 0) return img;
    const std::size_t w = img.width(), h = img.height();
    const bool swap_dims = (k % 2) == 1;
    ImageGrid out(swap_dims ? h : w, swap_dims ? w : h, img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) {
                const float v = img.at(x, y, c);
                switch (k) {
                case 1: out.at(y, w - 1 - x, c) = v; break;
                case 2: out.at(w - 1 - x, h - 1 - y, c) = v; break;
                default: out.at(h - 1 - y, x, c) = v; break;
                }
            }
        }
    }
    return out;
}

ImageGrid flip_horizontal(const ImageGrid& img) {
    ImageGrid out(img.width(), img.height(), img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = 0; y < img.height(); ++y) {
            for (std::size_t x = 0; x < img.width(); ++x) {
                out.at(img.width() - 1 - x, y, c) = img.at(x, y, c);
            }
        }
    }
    return out;
}

ImageGrid apply_augment(const ImageGrid& img, const AugmentOp& op) {
    switch (op.kind) {
    case AugmentOp::Kind::Rotate90: return rotate90(img, op.quarter_turns);
    case AugmentOp::Kind::FlipHorizontal: return flip_horizontal(img);
    case AugmentOp::Kind::Crop:
        if (op.size == 0 || op.x + op.size > img.width() || op.y + op.size > img.height()) {
            throw InvalidArgument("augment: crop window outside image bounds");
        }
        return crop(img, Rect{op.x, op.y, op.size, op.size});
    }
    throw InvalidArgument("augment: unknown operation");
}

SamplePair augment(const SamplePair& pair, std::span<const AugmentOp> ops) {
    if (!pair.input.same_shape(pair.truth)) throw InvalidArgument("augment: input/truth shape mismatch");
    SamplePair out = pair;
    for (const auto& op : ops) {
        out.input = apply_augment(out.input, op);
        out.truth = apply_augment(out.truth, op);
    }
    return out;
}

void to_json(nlohmann::json& j, const ClipPolicy& policy) {
    j = nlohmann::json{{"scope", policy.scope}, {"percentile", policy.percentile}};
    if (policy.scope == ClipPolicy::Scope::Global) {
        j["input_ceiling"] = policy.input_ceiling;
        j["truth_ceiling"] = policy.truth_ceiling;
    }
}

void from_json(const nlohmann::json& j, ClipPolicy& policy) {
    policy = ClipPolicy{};
    if (j.contains("scope")) j.at("scope").get_to(policy.scope);
    if (j.contains("percentile")) j.at("percentile").get_to(policy.percentile);
    if (j.contains("input_ceiling")) j.at("input_ceiling").get_to(policy.input_ceiling);
    if (j.contains("truth_ceiling")) j.at("truth_ceiling").get_to(policy.truth_ceiling);
}

void to_json(nlohmann::json& j, const NormalizationParams& params) {
    j = nlohmann::json{{"min", params.min}, {"max", params.max}, {"epsilon", params.epsilon}};
}

void from_json(const nlohmann::json& j, NormalizationParams& params) {
    params = NormalizationParams{};
    j.at("min").get_to(params.min);
    j.at("max").get_to(params.max);
    if (j.contains("epsilon")) j.at("epsilon").get_to(params.epsilon);
}

ImageGrid apply_clip(const ImageGrid& img, const ClipPolicy& policy, ImageRole role) {
    if (policy.scope == ClipPolicy::Scope::PerImage) return clip_percentile(img, policy.percentile);
    return clip_above(img, role == ImageRole::Input ? policy.input_ceiling : policy.truth_ceiling);
}

ImageGrid prepare_for_model(const ImageGrid& img, const ClipPolicy& policy, ImageRole role,
                            const NormalizationParams& params) {
    return clamp_unit(normalize(apply_clip(img, policy, role), params));
}

ClipPolicy resolve_clip_policy(ClipPolicy policy, std::span<const SamplePair> pairs) {
    if (policy.scope != ClipPolicy::Scope::Global || pairs.empty()) return policy;
    std::vector<float> inputs, truths;
    for (const auto& p : pairs) {
        inputs.insert(inputs.end(), p.input.data().begin(), p.input.data().end());
        truths.insert(truths.end(), p.truth.data().begin(), p.truth.data().end());
    }
    policy.input_ceiling = percentile_value(inputs, policy.percentile);
    policy.truth_ceiling = percentile_value(truths, policy.percentile);
    return policy;
}

NormalizationParams dataset_normalization(std::span<const SamplePair> pairs, const ClipPolicy& policy) {
    if (pairs.empty()) throw InvalidArgument("dataset_normalization: no pairs");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& p : pairs) {
        for (const auto* img : {&p.input, &p.truth}) {
            const auto role = img == &p.input ? ImageRole::Input : ImageRole::Truth;
            const ImageGrid clipped = apply_clip(*img, policy, role);
            const auto [mn, mx] = std::minmax_element(clipped.data().begin(), clipped.data().end());
            lo = std::min(lo, static_cast<double>(*mn));
            hi = std::max(hi, static_cast<double>(*mx));
        }
    }
    return NormalizationParams{lo, hi, 1e-6};
}

SyntheticFieldOptions SyntheticFieldOptions::edge_rich(std::size_t size) {
    SyntheticFieldOptions o;
    o.width = size;
    o.height = size;
    o.min_shapes = 8;
    o.max_shapes = 12;
    return o;
}

ImageGrid synthetic_truth(const SyntheticFieldOptions& o, std::uint64_t seed) {
    if (o.max_shapes < o.min_shapes) throw InvalidArgument("synthetic_truth: max_shapes < min_shapes");
    ImageGrid noise(o.width, o.height, o.channels);
    {
        auto d = noise.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
            CounterRng rng(seed, kFieldStream, i);
            d[i] = static_cast<float>(rng.normal());
        }
    }
    ImageGrid field = gaussian_blur(noise, o.background_sigma);

    // Standardize the smoothed noise per channel so contrast does not depend on sigma.
    for (std::size_t c = 0; c < field.channels(); ++c) {
        auto plane = field.channel(c);
        double mean = 0.0, sq = 0.0;
        for (float v : plane) mean += v;
        mean /= static_cast<double>(plane.size());
        for (float v : plane) sq += (v - mean) * (v - mean);
        const double sd = std::sqrt(sq / static_cast<double>(plane.size()));
        for (float& v : plane) {
            const double z = sd > 0.0 ? (v - mean) / sd : 0.0;
            v = static_cast<float>(0.5 * std::exp(o.background_contrast * z));
        }
    }

    CounterRng rng(seed, kShapeStream, 0);
    const std::size_t span = o.max_shapes - o.min_shapes + 1;
    const std::size_t shapes = o.min_shapes + rng.below(static_cast<std::uint32_t>(span));
    const double side = static_cast<double>(std::min(o.width, o.height));
    for (std::size_t s = 0; s < shapes; ++s) {
        const bool disc = rng.uniform() < 0.5;
        const double cx = rng.uniform() * static_cast<double>(o.width);
        const double cy = rng.uniform() * static_cast<double>(o.height);
        const double extent = side * (0.08 + 0.12 * rng.uniform());
        const double aspect = 0.6 + 0.8 * rng.uniform();
        const double level = std::clamp(0.5 * std::exp(0.8 * rng.normal()), 0.05, 3.0);
        for (std::size_t y = 0; y < o.height; ++y) {
            for (std::size_t x = 0; x < o.width; ++x) {
                const double dx = (static_cast<double>(x) + 0.5 - cx) / extent;
                const double dy = (static_cast<double>(y) + 0.5 - cy) / (extent * aspect);
                const bool inside = disc ? dx * dx + dy * dy <= 1.0 : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
                if (!inside) continue;
                for (std::size_t c = 0; c < o.channels; ++c) field.at(x, y, c) = static_cast<float>(level);
            }
        }
    }
    return o.edge_sigma > 0.0 ? gaussian_blur(field, o.edge_sigma) : field;
}

TimeSeriesStack synthetic_stack(const ImageGrid& truth, std::size_t frames, std::uint32_t looks,
                                std::uint64_t seed) {
    if (frames == 0) throw InvalidArgument("synthetic_stack: frames must be positive");
    TimeSeriesStack stack;
    stack.frames.reserve(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        stack.frames.push_back(apply_multiplicative(
            truth, sample_gamma_speckle(truth.width(), truth.height(), truth.channels(), looks, mix_seed(seed, t))));
    }
    return stack;
}

} // namespace sard
