#pragma once

#include "sard/image.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sard {

/// Returned by psnr when the two images are identical.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

/// 10 log10(max(reference)^2 / MSE).
double psnr(const ImageGrid& reference, const ImageGrid& test);

/// SSIM with dynamic range 1, k1 = 0.01, k2 = 0.03 and population statistics.
/// window = 0 uses whole-image statistics; otherwise the mean of the SSIM of every
/// window x window block (uniform weights, stride 1, fully inside the image).
double ssim(const ImageGrid& x, const ImageGrid& y, std::size_t window = 0);

/// mu^2 / sigma^2 over the region (all channels), sigma^2 the unbiased sample variance.
/// Throws DegenerateRegionError for a zero-variance region.
double enl(const ImageGrid& img, const Rect& region);

/// Region covering the whole image.
Rect full_frame(const ImageGrid& img);

/// The size x size window (stride size / 2) with the lowest coefficient of variation in
/// `reference`; used when no homogeneous rectangle is supplied.
Rect find_homogeneous_region(const ImageGrid& reference, std::size_t size = 16);

struct EdgePreservation {
    /// Histogram of sobel(truth) - sobel(filtered) over [-range, range].
    std::vector<std::uint64_t> histogram;
    double range = 1.05;
    double median_abs = 0.0;
    double max_abs = 0.0;

    /// Centre of the most populated bin.
    double mode_center() const;
};

/// Sobel gradients of both single-channel images and the statistics of their difference.
/// The default 21 bins put zero at the centre of the middle bin.
EdgePreservation edge_preservation(const ImageGrid& truth, const ImageGrid& filtered, std::size_t bins = 21,
                                   double range = 1.05);

struct GammaFit {
    double shape = 0.0;
    double scale = 0.0;
};

/// Moment fit: shape = mu^2 / sigma^2, scale = sigma^2 / mu (population variance).
GammaFit fit_gamma_moments(std::span<const float> values);

/// sup |F_a - F_b| of the two empirical CDFs.
double ks_two_sample(std::span<const float> a, std::span<const float> b);

struct DistributionCheck {
    double ks_statistic = 0.0;
    GammaFit truth_fit;
};

DistributionCheck distribution_check(const ImageGrid& truth, const ImageGrid& filtered);

struct MetricsRow {
    std::string id;
    double psnr_noisy = 0.0;
    double psnr_filtered = 0.0;
    double ssim_noisy = 0.0;
    double ssim_filtered = 0.0;
    double enl_noisy = 0.0;
    double enl_filtered = 0.0;
    double edge_median_absdiff = 0.0;
    double ks_statistic = 0.0;
};

/// Scores one (truth, noisy, filtered) triple. ENL is taken over `region`, or over
/// find_homogeneous_region(truth) when none is given; a filter that flattens the region
/// completely scores ENL = +inf.
MetricsRow evaluate_pair(const std::string& id, const ImageGrid& truth, const ImageGrid& noisy,
                         const ImageGrid& filtered, std::optional<Rect> region = std::nullopt,
                         std::size_t ssim_window = 0);

/// Same without ground truth: only the ENL columns are meaningful, the rest are NaN.
MetricsRow evaluate_without_truth(const std::string& id, const ImageGrid& noisy, const ImageGrid& filtered,
                                  const Rect& region);

struct MetricsReport {
    std::vector<MetricsRow> rows;

    /// Arithmetic mean of every column, id "aggregate".
    MetricsRow aggregate() const;
    std::string to_csv() const;
    void write_csv(const std::filesystem::path& path) const;
};

inline constexpr const char* kMetricsCsvHeader =
    "id,psnr_noisy,psnr_filtered,ssim_noisy,ssim_filtered,enl_noisy,enl_filtered,edge_median_absdiff,ks_statistic";

} // namespace sard
