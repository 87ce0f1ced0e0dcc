#pragma once

#include "sard/archive.hpp"
#include "sard/filters.hpp"
#include "sard/metrics.hpp"
#include "sard/nn/inference.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sard {

/// Normalized (truth, noisy input) pair of an archive entry, exactly as the model sees it.
struct EvalPair {
    std::string id;
    ImageGrid truth;
    ImageGrid noisy;
};

/// Held-out split names: "train", "val", "test", or "heldout" for val and test together.
std::vector<std::size_t> split_indices(const Archive& archive, const std::string& split);

/// Clips and normalizes the selected entries with the archive's policy and range.
std::vector<EvalPair> prepare_eval_pairs(const Archive& archive, const std::vector<std::size_t>& indices);

/// Same with an explicit clip policy and range, e.g. those persisted with a model.
std::vector<EvalPair> prepare_eval_pairs(const Archive& archive, const std::vector<std::size_t>& indices,
                                         const ClipPolicy& clip, const NormalizationParams& norm);

struct EvalOptions {
    /// ENL rectangle; when absent each image uses find_homogeneous_region(truth).
    std::optional<Rect> region;
    std::size_t ssim_window = 0;
    nn::TileOptions tiles;
};

struct MethodResult {
    std::string method;
    /// Chosen configuration ("" for the model).
    std::string setting;
    MetricsReport report;
};

MetricsReport evaluate_model(const nn::Network& net, const std::vector<EvalPair>& pairs, const EvalOptions& opts = {});

/// Runs every swept configuration of `method` and keeps the one with the best mean PSNR
/// (mean SSIM breaks ties).
MethodResult evaluate_baseline(const std::string& method, double looks, const std::vector<EvalPair>& pairs,
                               const EvalOptions& opts = {});

/// Model (when given) plus every requested baseline, sorted by mean filtered PSNR, descending.
std::vector<MethodResult> compare_methods(const nn::Network* net, const std::vector<std::string>& methods,
                                          double looks, const std::vector<EvalPair>& pairs,
                                          const EvalOptions& opts = {});

inline constexpr const char* kCompareCsvHeader =
    "rank,method,setting,psnr_noisy,psnr_filtered,ssim_noisy,ssim_filtered,enl_noisy,enl_filtered,"
    "edge_median_absdiff,ks_statistic";

/// One aggregate row per method, in the given order.
std::string comparison_csv(const std::vector<MethodResult>& results);

} // namespace sard
