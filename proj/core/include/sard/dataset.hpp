#pragma once

#include "sard/image.hpp"
#include "sard/speckle.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sard {

/// T co-registered intensity frames over one footprint.
struct TimeSeriesStack {
    std::vector<ImageGrid> frames;
    double lat = 0.0;
    double lon = 0.0;

    void validate() const;
};

struct SamplePair {
    ImageGrid input;
    ImageGrid truth;
    SpeckleConfig noise;
};

struct SplitSpec {
    double train = 0.758;
    double val = 0.228;
    double test = 0.014;
    std::uint64_t seed = 0;

    void validate() const;
};

void to_json(nlohmann::json& j, const SplitSpec& spec);
void from_json(const nlohmann::json& j, SplitSpec& spec);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

/// Per-pixel arithmetic mean over the frames, accumulated in double precision.
ImageGrid temporal_average(const TimeSeriesStack& stack);

/// input = noise(truth) per cfg; truth is copied through unchanged.
SamplePair synthesize_pair(const ImageGrid& truth, const SpeckleConfig& cfg);

/// Seed-deterministic shuffle of [0, n) into train/val/test. Val and test sizes are
/// floor(n * fraction); the remainder goes to train.
SplitIndices split_dataset(std::size_t n, const SplitSpec& spec);

struct AugmentOp {
    enum class Kind { Rotate90, FlipHorizontal, Crop };
    Kind kind = Kind::Rotate90;
    int quarter_turns = 1;
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t size = 0;

    static AugmentOp rotate90(int k) { return {Kind::Rotate90, k, 0, 0, 0}; }
    static AugmentOp flip() { return {Kind::FlipHorizontal, 0, 0, 0, 0}; }
    static AugmentOp crop(std::size_t x, std::size_t y, std::size_t size) { return {Kind::Crop, 0, x, y, size}; }
};

/// Counter-clockwise rotation by k quarter turns (k may be negative).
ImageGrid rotate90(const ImageGrid& img, int k);
ImageGrid flip_horizontal(const ImageGrid& img);
ImageGrid apply_augment(const ImageGrid& img, const AugmentOp& op);

/// Applies the same geometric transforms, in order, to input and truth.
SamplePair augment(const SamplePair& pair, std::span<const AugmentOp> ops);

/// Outlier clipping applied before normalization.
struct ClipPolicy {
    enum class Scope { PerImage, Global };
    Scope scope = Scope::PerImage;
    double percentile = 90.0;
    /// Dataset-wide ceilings, used only when scope == Global.
    float input_ceiling = std::numeric_limits<float>::infinity();
    float truth_ceiling = std::numeric_limits<float>::infinity();

    friend bool operator==(const ClipPolicy&, const ClipPolicy&) = default;
};

NLOHMANN_JSON_SERIALIZE_ENUM(ClipPolicy::Scope, {
    {ClipPolicy::Scope::PerImage, "per_image"},
    {ClipPolicy::Scope::Global, "global"},
})

void to_json(nlohmann::json& j, const ClipPolicy& policy);
void from_json(const nlohmann::json& j, ClipPolicy& policy);
void to_json(nlohmann::json& j, const NormalizationParams& params);
void from_json(const nlohmann::json& j, NormalizationParams& params);

enum class ImageRole { Input, Truth };

ImageGrid apply_clip(const ImageGrid& img, const ClipPolicy& policy, ImageRole role);

/// clip -> normalize -> saturate into [0, 1]; the exact path every model input and target takes.
ImageGrid prepare_for_model(const ImageGrid& img, const ClipPolicy& policy, ImageRole role,
                            const NormalizationParams& params);

/// Fills the dataset-global ceilings of a Global policy from the given pairs.
ClipPolicy resolve_clip_policy(ClipPolicy policy, std::span<const SamplePair> pairs);

/// Dataset-global min/max over the clipped inputs and truths.
NormalizationParams dataset_normalization(std::span<const SamplePair> pairs, const ClipPolicy& policy);

/// Parameters of the synthetic ground-truth generator: a log-normal smooth background
/// (blurred white noise) overlaid with constant-intensity rectangles and discs, then
/// softened by a small blur so edges span a few pixels.
struct SyntheticFieldOptions {
    std::size_t width = 96;
    std::size_t height = 96;
    std::size_t channels = 1;
    double background_sigma = 8.0;
    double background_contrast = 0.4;
    std::size_t min_shapes = 2;
    std::size_t max_shapes = 5;
    double edge_sigma = 0.7;

    static SyntheticFieldOptions edge_rich(std::size_t size);
};

ImageGrid synthetic_truth(const SyntheticFieldOptions& options, std::uint64_t seed);

/// T independent speckled looks at the same truth, as a co-registered time series would provide.
TimeSeriesStack synthetic_stack(const ImageGrid& truth, std::size_t frames, std::uint32_t looks,
                                std::uint64_t seed);

} // namespace sard
