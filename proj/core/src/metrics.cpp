#include "sard/metrics.hpp"

#include "sard/error.hpp"
#include "sard/filters.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace sard {

namespace {

void require_same_shape(const ImageGrid& a, const ImageGrid& b, const char* name) {
    if (!a.same_shape(b) || a.empty()) throw InvalidArgument(std::string(name) + ": shape mismatch");
}

void require_region(const ImageGrid& img, const Rect& r) {
    if (r.width == 0 || r.height == 0 || r.x + r.width > img.width() || r.y + r.height > img.height()) {
        throw InvalidArgument("region outside image bounds");
    }
}

constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

double ssim_from_moments(double mx, double my, double vx, double vy, double cov) {
    return ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) / ((mx * mx + my * my + kC1) * (vx + vy + kC2));
}

double ssim_global(std::span<const float> x, std::span<const float> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    return ssim_from_moments(mx, my, vx / n, vy / n, cov / n);
}

double ssim_windowed(const ImageGrid& a, const ImageGrid& b, std::size_t win) {
    if (win < 2 || win > a.width() || win > a.height()) throw InvalidArgument("ssim: window does not fit the image");
    const double n = static_cast<double>(win * win);
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t c = 0; c < a.channels(); ++c) {
        for (std::size_t y0 = 0; y0 + win <= a.height(); ++y0) {
            for (std::size_t x0 = 0; x0 + win <= a.width(); ++x0) {
                double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
                for (std::size_t y = y0; y < y0 + win; ++y) {
                    for (std::size_t x = x0; x < x0 + win; ++x) {
                        const double u = a.at(x, y, c), v = b.at(x, y, c);
                        sx += u;
                        sy += v;
                        sxx += u * u;
                        syy += v * v;
                        sxy += u * v;
                    }
                }
                const double mx = sx / n, my = sy / n;
                total += ssim_from_moments(mx, my, std::max(0.0, sxx / n - mx * mx), std::max(0.0, syy / n - my * my),
                                           sxy / n - mx * my);
                ++count;
            }
        }
    }
    return total / static_cast<double>(count);
}

double mean_of(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += x;
    return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (v.size() % 2 == 1) return *mid;
    const double upper = *mid;
    const double lower = *std::max_element(v.begin(), mid);
    return 0.5 * (lower + upper);
}

double enl_or_inf(const ImageGrid& img, const Rect& region) {
    try {
        return enl(img, region);
    } catch (const DegenerateRegionError&) {
        return std::numeric_limits<double>::infinity();
    }
}

void format_value(std::ostream& os, double v) {
    if (std::isnan(v)) {
        os << "nan";
    } else if (std::isinf(v)) {
        os << (v > 0 ? "inf" : "-inf");
    } else {
        os << std::fixed << std::setprecision(4) << v;
    }
}

} // namespace

double psnr(const ImageGrid& reference, const ImageGrid& test) {
    require_same_shape(reference, test, "psnr");
    const auto r = reference.data();
    const auto t = test.data();
    double peak = -std::numeric_limits<double>::infinity();
    double sse = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        peak = std::max(peak, static_cast<double>(r[i]));
        const double d = static_cast<double>(r[i]) - t[i];
        sse += d * d;
    }
    if (sse == 0.0) return kPsnrIdentical;
    return 10.0 * std::log10(peak * peak / (sse / static_cast<double>(r.size())));
}

double ssim(const ImageGrid& x, const ImageGrid& y, std::size_t window) {
    require_same_shape(x, y, "ssim");
    if (window == 0) return ssim_global(x.data(), y.data());
    return ssim_windowed(x, y, window);
}

double enl(const ImageGrid& img, const Rect& region) {
    require_region(img, region);
    const std::size_t n = region.width * region.height * img.channels();
    if (n < 2) throw InvalidArgument("enl: region needs at least 2 pixels");
    double sum = 0.0;
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = region.y; y < region.y + region.height; ++y) {
            for (std::size_t x = region.x; x < region.x + region.width; ++x) sum += img.at(x, y, c);
        }
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t c = 0; c < img.channels(); ++c) {
        for (std::size_t y = region.y; y < region.y + region.height; ++y) {
            for (std::size_t x = region.x; x < region.x + region.width; ++x) {
                const double d = img.at(x, y, c) - mean;
                ss += d * d;
            }
        }
    }
    const double variance = ss / static_cast<double>(n - 1);
    if (variance <= 0.0) throw DegenerateRegionError("enl: region has zero variance");
    return mean * mean / variance;
}

Rect full_frame(const ImageGrid& img) { return {0, 0, img.width(), img.height()}; }

Rect find_homogeneous_region(const ImageGrid& reference, std::size_t size) {
    if (reference.empty()) throw InvalidArgument("find_homogeneous_region: empty image");
    size = std::min({size, reference.width(), reference.height()});
    if (size < 2) throw InvalidArgument("find_homogeneous_region: image too small");
    const std::size_t step = std::max<std::size_t>(1, size / 2);
    auto starts = [&](std::size_t extent) {
        std::vector<std::size_t> s;
        for (std::size_t p = 0; p + size <= extent; p += step) s.push_back(p);
        if (s.back() + size < extent) s.push_back(extent - size);
        return s;
    };
    Rect best{0, 0, size, size};
    double best_cv = std::numeric_limits<double>::infinity();
    for (std::size_t y0 : starts(reference.height())) {
        for (std::size_t x0 : starts(reference.width())) {
            double sum = 0.0, sq = 0.0;
            for (std::size_t c = 0; c < reference.channels(); ++c) {
                for (std::size_t y = y0; y < y0 + size; ++y) {
                    for (std::size_t x = x0; x < x0 + size; ++x) {
                        const double v = reference.at(x, y, c);
                        sum += v;
                        sq += v * v;
                    }
                }
            }
            const double n = static_cast<double>(size * size * reference.channels());
            const double mean = sum / n;
            if (mean <= 0.0) continue;
            const double cv = std::sqrt(std::max(0.0, sq / n - mean * mean)) / mean;
            if (cv < best_cv) {
                best_cv = cv;
                best = {x0, y0, size, size};
            }
        }
    }
    return best;
}

double EdgePreservation::mode_center() const {
    const auto it = std::max_element(histogram.begin(), histogram.end());
    const double width = 2.0 * range / static_cast<double>(histogram.size());
    return -range + (static_cast<double>(it - histogram.begin()) + 0.5) * width;
}

EdgePreservation edge_preservation(const ImageGrid& truth, const ImageGrid& filtered, std::size_t bins, double range) {
    require_same_shape(truth, filtered, "edge_preservation");
    const ImageGrid gt = sobel_gradient(truth);
    const ImageGrid gf = sobel_gradient(filtered);
    std::vector<float> diff(gt.size());
    std::vector<double> abs_diff(gt.size());
    EdgePreservation out;
    out.range = range;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = gt.data()[i] - gf.data()[i];
        abs_diff[i] = std::abs(static_cast<double>(diff[i]));
        out.max_abs = std::max(out.max_abs, abs_diff[i]);
    }
    out.histogram = histogram(diff, bins, -range, range);
    out.median_abs = median_of(std::move(abs_diff));
    return out;
}

GammaFit fit_gamma_moments(std::span<const float> values) {
    if (values.size() < 2) throw InvalidArgument("fit_gamma_moments: need at least 2 values");
    const double mean = mean_of(values);
    double ss = 0.0;
    for (float v : values) ss += (v - mean) * (v - mean);
    const double variance = ss / static_cast<double>(values.size());
    if (variance <= 0.0 || mean <= 0.0) throw DegenerateRegionError("fit_gamma_moments: degenerate sample");
    return {mean * mean / variance, variance / mean};
}

double ks_two_sample(std::span<const float> a, std::span<const float> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("ks_two_sample: empty sample");
    std::vector<float> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const float v = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == v) ++i;
        while (j < sb.size() && sb[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

DistributionCheck distribution_check(const ImageGrid& truth, const ImageGrid& filtered) {
    require_same_shape(truth, filtered, "distribution_check");
    return {ks_two_sample(truth.data(), filtered.data()), fit_gamma_moments(truth.data())};
}

MetricsRow evaluate_pair(const std::string& id, const ImageGrid& truth, const ImageGrid& noisy,
                         const ImageGrid& filtered, std::optional<Rect> region, std::size_t ssim_window) {
    require_same_shape(truth, noisy, "evaluate_pair");
    require_same_shape(truth, filtered, "evaluate_pair");
    const Rect r = region ? *region : find_homogeneous_region(truth);
    MetricsRow row;
    row.id = id;
    row.psnr_noisy = psnr(truth, noisy);
    row.psnr_filtered = psnr(truth, filtered);
    row.ssim_noisy = ssim(truth, noisy, ssim_window);
    row.ssim_filtered = ssim(truth, filtered, ssim_window);
    row.enl_noisy = enl_or_inf(noisy, r);
    row.enl_filtered = enl_or_inf(filtered, r);
    std::vector<double> medians;
    for (std::size_t c = 0; c < truth.channels(); ++c) {
        const auto tc = truth.channel(c);
        const auto fc = filtered.channel(c);
        const ImageGrid t(truth.width(), truth.height(), 1, std::vector<float>(tc.begin(), tc.end()));
        const ImageGrid f(truth.width(), truth.height(), 1, std::vector<float>(fc.begin(), fc.end()));
        medians.push_back(edge_preservation(t, f).median_abs);
    }
    double edge = 0.0;
    for (double m : medians) edge += m;
    row.edge_median_absdiff = edge / static_cast<double>(medians.size());
    row.ks_statistic = ks_two_sample(truth.data(), filtered.data());
    return row;
}

MetricsRow evaluate_without_truth(const std::string& id, const ImageGrid& noisy, const ImageGrid& filtered,
                                  const Rect& region) {
    require_same_shape(noisy, filtered, "evaluate_without_truth");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    MetricsRow row{id, nan, nan, nan, nan, enl_or_inf(noisy, region), enl_or_inf(filtered, region), nan, nan};
    return row;
}

MetricsRow MetricsReport::aggregate() const {
    MetricsRow agg;
    agg.id = "aggregate";
    if (rows.empty()) return agg;
    for (const auto& r : rows) {
        agg.psnr_noisy += r.psnr_noisy;
        agg.psnr_filtered += r.psnr_filtered;
        agg.ssim_noisy += r.ssim_noisy;
        agg.ssim_filtered += r.ssim_filtered;
        agg.enl_noisy += r.enl_noisy;
        agg.enl_filtered += r.enl_filtered;
        agg.edge_median_absdiff += r.edge_median_absdiff;
        agg.ks_statistic += r.ks_statistic;
    }
    const double n = static_cast<double>(rows.size());
    agg.psnr_noisy /= n;
    agg.psnr_filtered /= n;
    agg.ssim_noisy /= n;
    agg.ssim_filtered /= n;
    agg.enl_noisy /= n;
    agg.enl_filtered /= n;
    agg.edge_median_absdiff /= n;
    agg.ks_statistic /= n;
    return agg;
}

std::string MetricsReport::to_csv() const {
    std::ostringstream os;
    os << kMetricsCsvHeader << '\n';
    auto emit = [&](const MetricsRow& r) {
        os << r.id;
        for (double v : {r.psnr_noisy, r.psnr_filtered, r.ssim_noisy, r.ssim_filtered, r.enl_noisy, r.enl_filtered,
                         r.edge_median_absdiff, r.ks_statistic}) {
            os << ',';
            format_value(os, v);
        }
        os << '\n';
    };
    for (const auto& r : rows) emit(r);
    emit(aggregate());
    return os.str();
}

void MetricsReport::write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_csv();
    if (!out) throw DataError("failed writing " + path.string());
}

} // namespace sard
