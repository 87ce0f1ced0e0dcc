#include "sard/speckle.hpp"

#include "sard/error.hpp"
#include "sard/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace sard {

namespace {

constexpr std::uint32_t kGammaStream = 1;
constexpr std::uint32_t kNakagamiStream = 2;
constexpr std::uint32_t kGaussianStream = 3;

void require_looks(std::uint32_t looks) {
    if (looks < 1) throw InvalidArgument("speckle: number of looks must be >= 1");
}

template <typename Draw>
ImageGrid fill_field(std::size_t width, std::size_t height, std::size_t channels, Draw draw) {
    ImageGrid field(width, height, channels);
    auto data = field.data();
    parallel_for(data.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) data[i] = static_cast<float>(draw(i));
    });
    return field;
}

} // namespace

void SpeckleConfig::validate() const {
    if (model != NoiseModel::GaussianAdditive) require_looks(looks);
    if (!(gauss_std >= 0.0)) throw InvalidArgument("speckle: gaussian std must be >= 0");
    if (!std::isfinite(gauss_mean)) throw InvalidArgument("speckle: gaussian mean must be finite");
}

void to_json(nlohmann::json& j, const SpeckleConfig& cfg) {
    j = nlohmann::json{{"model", cfg.model},
                       {"looks", cfg.looks},
                       {"gauss_mean", cfg.gauss_mean},
                       {"gauss_std", cfg.gauss_std},
                       {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, SpeckleConfig& cfg) {
    cfg = SpeckleConfig{};
    if (j.contains("model")) j.at("model").get_to(cfg.model);
    if (j.contains("looks")) j.at("looks").get_to(cfg.looks);
    if (j.contains("gauss_mean")) j.at("gauss_mean").get_to(cfg.gauss_mean);
    if (j.contains("gauss_std")) j.at("gauss_std").get_to(cfg.gauss_std);
    if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
}

double sample_unit_mean_gamma(CounterRng& rng, double looks) {
    const double d = looks - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = rng.normal();
        const double t = 1.0 + c * x;
        if (t <= 0.0) continue;
        const double v = t * t * t;
        const double u = rng.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
            return d * v / looks;
        }
    }
}

ImageGrid sample_gamma_speckle(std::size_t width, std::size_t height, std::size_t channels,
                               std::uint32_t looks, std::uint64_t seed) {
    require_looks(looks);
    return fill_field(width, height, channels, [&](std::size_t i) {
        CounterRng rng(seed, kGammaStream, i);
        return sample_unit_mean_gamma(rng, looks);
    });
}

ImageGrid sample_nakagami_speckle(std::size_t width, std::size_t height, std::size_t channels,
                                  std::uint32_t looks, std::uint64_t seed) {
    require_looks(looks);
    return fill_field(width, height, channels, [&](std::size_t i) {
        CounterRng rng(seed, kNakagamiStream, i);
        return std::sqrt(sample_unit_mean_gamma(rng, looks));
    });
}

ImageGrid apply_multiplicative(const ImageGrid& img, const ImageGrid& field) {
    if (!img.same_shape(field)) throw InvalidArgument("apply_multiplicative: dimension mismatch");
    ImageGrid out = img;
    auto dst = out.data();
    const auto s = field.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] *= s[i];
    return out;
}

ImageGrid sample_gaussian_noise(std::size_t width, std::size_t height, std::size_t channels, double mean,
                                double std, std::uint64_t seed) {
    if (!(std >= 0.0)) throw InvalidArgument("add_gaussian: std must be >= 0");
    return fill_field(width, height, channels, [&](std::size_t i) {
        CounterRng rng(seed, kGaussianStream, i);
        return mean + std * rng.normal();
    });
}

ImageGrid add_gaussian(const ImageGrid& img, double mean, double std, std::uint64_t seed) {
    const ImageGrid noise = sample_gaussian_noise(img.width(), img.height(), img.channels(), mean, std, seed);
    ImageGrid out = img;
    auto dst = out.data();
    const auto n = noise.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::clamp(dst[i] + n[i], 0.0f, 1.0f);
    return out;
}

ImageGrid apply_noise(const ImageGrid& img, const SpeckleConfig& cfg) {
    cfg.validate();
    switch (cfg.model) {
    case NoiseModel::GammaIntensity:
        return apply_multiplicative(
            img, sample_gamma_speckle(img.width(), img.height(), img.channels(), cfg.looks, cfg.seed));
    case NoiseModel::NakagamiAmplitude:
        return apply_multiplicative(
            img, sample_nakagami_speckle(img.width(), img.height(), img.channels(), cfg.looks, cfg.seed));
    case NoiseModel::GaussianAdditive:
        return add_gaussian(img, cfg.gauss_mean, cfg.gauss_std, cfg.seed);
    }
    throw InvalidArgument("unknown noise model");
}

} // namespace sard
