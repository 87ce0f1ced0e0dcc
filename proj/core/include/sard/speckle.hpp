#pragma once

#include "sard/image.hpp"
#include "sard/rng.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>

namespace sard {

enum class NoiseModel { GammaIntensity, NakagamiAmplitude, GaussianAdditive };

NLOHMANN_JSON_SERIALIZE_ENUM(NoiseModel, {
    {NoiseModel::GammaIntensity, "gamma_intensity"},
    {NoiseModel::NakagamiAmplitude, "nakagami_amplitude"},
    {NoiseModel::GaussianAdditive, "gaussian_additive"},
})

struct SpeckleConfig {
    NoiseModel model = NoiseModel::GammaIntensity;
    std::uint32_t looks = 4;
    double gauss_mean = 0.0;
    double gauss_std = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const SpeckleConfig&, const SpeckleConfig&) = default;
};

void to_json(nlohmann::json& j, const SpeckleConfig& cfg);
void from_json(const nlohmann::json& j, SpeckleConfig& cfg);

/// One Gamma(shape = looks, scale = 1/looks) variate by Marsaglia-Tsang rejection.
double sample_unit_mean_gamma(CounterRng& rng, double looks);

/// i.i.d. unit-mean Gamma intensity speckle, variance 1/L. Pixel i draws from Philox
/// stream (seed, i), so the field does not depend on the worker count.
ImageGrid sample_gamma_speckle(std::size_t width, std::size_t height, std::size_t channels,
                               std::uint32_t looks, std::uint64_t seed);

/// Nakagami amplitude speckle: square root of a unit-mean Gamma variate (Rayleigh when L = 1).
ImageGrid sample_nakagami_speckle(std::size_t width, std::size_t height, std::size_t channels,
                                  std::uint32_t looks, std::uint64_t seed);

/// Elementwise Y = X * S.
ImageGrid apply_multiplicative(const ImageGrid& img, const ImageGrid& field);

/// y = clamp(x + n, 0, 1), n ~ Normal(mean, std^2).
ImageGrid add_gaussian(const ImageGrid& img, double mean, double std, std::uint64_t seed);

/// The additive noise field n itself (before adding and clamping).
ImageGrid sample_gaussian_noise(std::size_t width, std::size_t height, std::size_t channels, double mean,
                                double std, std::uint64_t seed);

/// Applies the configured noise model to an image.
ImageGrid apply_noise(const ImageGrid& img, const SpeckleConfig& cfg);

} // namespace sard
