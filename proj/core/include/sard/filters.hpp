#pragma once

#include "sard/image.hpp"

#include <string>
#include <vector>

namespace sard {

/// Square odd window with replicated borders.
struct WindowSpec {
    std::size_t size = 7;
    void validate() const;
};

ImageGrid mean_filter(const ImageGrid& img, WindowSpec win = {});
ImageGrid median_filter(const ImageGrid& img, WindowSpec win = {});

// Adaptive filters below use the speckle coefficient of variation Cu = 1/sqrt(L) and
// the local one Ci = sigma_w / mu_w. A window with zero variance collapses to its mean.

/// x = mu + W (y - mu), W = clamp(1 - Cu^2 / Ci^2, 0, 1)
ImageGrid lee_filter(const ImageGrid& img, WindowSpec win = {}, double looks = 4.0);

/// W = clamp((1 - Cu^2 / Ci^2) / (1 + Cu^2), 0, 1)
ImageGrid kuan_filter(const ImageGrid& img, WindowSpec win = {}, double looks = 4.0);

/// Lopes' three regimes: mean below Cu, identity above Cmax = sqrt(3) Cu, and in between
/// an exponentially weighted blend exp(-damping (Ci - Cu) / (Cmax - Ci)).
ImageGrid enhanced_lee_filter(const ImageGrid& img, WindowSpec win = {}, double looks = 4.0,
                              double damping = 1.0);

/// Weights exp(-damping * Ci^2 * r) over the window, r the Euclidean distance to the centre.
ImageGrid frost_filter(const ImageGrid& img, WindowSpec win = {}, double damping = 2.0);

/// Joint spatial/range Gaussian weights. window = 0 picks 2 * ceil(3 spatial_sigma) + 1.
ImageGrid bilateral_filter(const ImageGrid& img, double spatial_sigma, double range_sigma,
                           std::size_t window = 0);

/// One concrete baseline configuration as swept by the compare command.
struct BaselineSetting {
    std::string method;
    std::size_t window = 7;
    double looks = 4.0;
    double damping = 2.0;
    /// Bilateral only: range sigma as a fraction of the image mean.
    double range_fraction = 0.5;

    std::string describe() const;
};

/// Registered names: lee, lee_enhanced, kuan, frost, mean, median, bilateral.
const std::vector<std::string>& baseline_names();

/// Configurations tried per method (windows 5, 7, 9; bilateral also sweeps range sigma).
std::vector<BaselineSetting> baseline_sweep(const std::string& method, double looks);

/// Runs one baseline, channel by channel.
ImageGrid run_baseline(const ImageGrid& img, const BaselineSetting& setting);

} // namespace sard
