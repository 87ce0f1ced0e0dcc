#include "sard/filters.hpp"

#include "sard/error.hpp"
#include "sard/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sard {

namespace {

void require_single_channel(const ImageGrid& img, const char* name) {
    if (img.channels() != 1) throw InvalidArgument(std::string(name) + ": single-channel input required");
}

/// Image padded by `radius` on every side with replicated borders, stored in double.
struct Padded {
    std::size_t radius;
    std::size_t stride;
    std::vector<double> data;

    Padded(const ImageGrid& img, std::size_t r) : radius(r), stride(img.width() + 2 * r) {
        const auto w = static_cast<std::ptrdiff_t>(img.width());
        const auto h = static_cast<std::ptrdiff_t>(img.height());
        const auto rr = static_cast<std::ptrdiff_t>(r);
        data.resize(stride * (img.height() + 2 * r));
        for (std::ptrdiff_t y = -rr; y < h + rr; ++y) {
            for (std::ptrdiff_t x = -rr; x < w + rr; ++x) {
                const auto xs = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x, 0, w - 1));
                const auto ys = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(y, 0, h - 1));
                data[static_cast<std::size_t>(y + rr) * stride + static_cast<std::size_t>(x + rr)] = img.at(xs, ys);
            }
        }
    }

    /// Window value at offset (dx, dy) in [0, 2r] around output pixel (x, y).
    double at(std::size_t x, std::size_t y, std::size_t dx, std::size_t dy) const {
        return data[(y + dy) * stride + x + dx];
    }
};

struct LocalStats {
    double mean;
    double variance;
};

LocalStats local_stats(const Padded& p, std::size_t x, std::size_t y, std::size_t size) {
    double sum = 0.0, sq = 0.0;
    for (std::size_t dy = 0; dy < size; ++dy) {
        for (std::size_t dx = 0; dx < size; ++dx) {
            const double v = p.at(x, y, dx, dy);
            sum += v;
            sq += v * v;
        }
    }
    const double n = static_cast<double>(size * size);
    const double mean = sum / n;
    return {mean, std::max(0.0, sq / n - mean * mean)};
}

/// Applies fn(x, y) -> value over all pixels, rows split across workers.
template <typename Fn>
ImageGrid per_pixel(const ImageGrid& img, Fn fn) {
    ImageGrid out(img.width(), img.height(), 1);
    parallel_for(img.height(), [&](std::size_t y0, std::size_t y1) {
        for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t x = 0; x < img.width(); ++x) out.at(x, y) = static_cast<float>(fn(x, y));
        }
    });
    return out;
}

double noise_cv2(double looks) {
    if (!(looks >= 1.0)) throw InvalidArgument("filter: looks must be >= 1");
    return 1.0 / looks;
}

} // namespace

void WindowSpec::validate() const {
    if (size < 3 || size % 2 == 0) throw InvalidArgument("window size must be odd and >= 3");
}

ImageGrid mean_filter(const ImageGrid& img, WindowSpec win) {
    win.validate();
    require_single_channel(img, "mean_filter");
    const Padded p(img, win.size / 2);
    return per_pixel(img, [&](std::size_t x, std::size_t y) { return local_stats(p, x, y, win.size).mean; });
}

ImageGrid median_filter(const ImageGrid& img, WindowSpec win) {
    win.validate();
    require_single_channel(img, "median_filter");
    const Padded p(img, win.size / 2);
    const std::size_t n = win.size * win.size;
    ImageGrid out(img.width(), img.height(), 1);
    parallel_for(img.height(), [&](std::size_t y0, std::size_t y1) {
        std::vector<double> window(n);
        for (std::size_t y = y0; y < y1; ++y) {
            for (std::size_t x = 0; x < img.width(); ++x) {
                for (std::size_t dy = 0; dy < win.size; ++dy) {
                    for (std::size_t dx = 0; dx < win.size; ++dx) window[dy * win.size + dx] = p.at(x, y, dx, dy);
                }
                std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(n / 2), window.end());
                out.at(x, y) = static_cast<float>(window[n / 2]);
            }
        }
    });
    return out;
}

ImageGrid lee_filter(const ImageGrid& img, WindowSpec win, double looks) {
    win.validate();
    require_single_channel(img, "lee_filter");
    const double cu2 = noise_cv2(looks);
    const Padded p(img, win.size / 2);
    return per_pixel(img, [&](std::size_t x, std::size_t y) {
        const auto [mu, var] = local_stats(p, x, y, win.size);
        if (var <= 0.0) return mu;
        const double weight = std::clamp(1.0 - cu2 * mu * mu / var, 0.0, 1.0);
        return mu + weight * (img.at(x, y) - mu);
    });
}

ImageGrid kuan_filter(const ImageGrid& img, WindowSpec win, double looks) {
    win.validate();
    require_single_channel(img, "kuan_filter");
    const double cu2 = noise_cv2(looks);
    const Padded p(img, win.size / 2);
    return per_pixel(img, [&](std::size_t x, std::size_t y) {
        const auto [mu, var] = local_stats(p, x, y, win.size);
        if (var <= 0.0) return mu;
        const double weight = std::clamp((1.0 - cu2 * mu * mu / var) / (1.0 + cu2), 0.0, 1.0);
        return mu + weight * (img.at(x, y) - mu);
    });
}

ImageGrid enhanced_lee_filter(const ImageGrid& img, WindowSpec win, double looks, double damping) {
    win.validate();
    require_single_channel(img, "enhanced_lee_filter");
    const double cu = std::sqrt(noise_cv2(looks));
    const double cmax = std::sqrt(3.0) * cu;
    const Padded p(img, win.size / 2);
    return per_pixel(img, [&](std::size_t x, std::size_t y) {
        const auto [mu, var] = local_stats(p, x, y, win.size);
        if (var <= 0.0 || mu <= 0.0) return mu;
        const double ci = std::sqrt(var) / mu;
        const double pixel = img.at(x, y);
        if (ci <= cu) return mu;
        if (ci >= cmax) return pixel;
        const double weight = std::exp(-damping * (ci - cu) / (cmax - ci));
        return mu * weight + pixel * (1.0 - weight);
    });
}

ImageGrid frost_filter(const ImageGrid& img, WindowSpec win, double damping) {
    win.validate();
    require_single_channel(img, "frost_filter");
    const std::size_t r = win.size / 2;
    const Padded p(img, r);
    std::vector<double> distance(win.size * win.size);
    for (std::size_t dy = 0; dy < win.size; ++dy) {
        for (std::size_t dx = 0; dx < win.size; ++dx) {
            const double ox = static_cast<double>(dx) - static_cast<double>(r);
            const double oy = static_cast<double>(dy) - static_cast<double>(r);
            distance[dy * win.size + dx] = std::sqrt(ox * ox + oy * oy);
        }
    }
    return per_pixel(img, [&](std::size_t x, std::size_t y) {
        const auto [mu, var] = local_stats(p, x, y, win.size);
        if (var <= 0.0) return mu;
        const double b = mu > 0.0 ? damping * var / (mu * mu) : 0.0;
        double num = 0.0, den = 0.0;
        for (std::size_t dy = 0; dy < win.size; ++dy) {
            for (std::size_t dx = 0; dx < win.size; ++dx) {
                const double w = std::exp(-b * distance[dy * win.size + dx]);
                num += w * p.at(x, y, dx, dy);
                den += w;
            }
        }
        return num / den;
    });
}

ImageGrid bilateral_filter(const ImageGrid& img, double spatial_sigma, double range_sigma, std::size_t window) {
    require_single_channel(img, "bilateral_filter");
    if (!(spatial_sigma > 0.0) || !(range_sigma > 0.0)) {
        throw InvalidArgument("bilateral_filter: sigmas must be positive");
    }
    if (window == 0) window = 2 * static_cast<std::size_t>(std::ceil(3.0 * spatial_sigma)) + 1;
    WindowSpec{window}.validate();
    const std::size_t r = window / 2;
    const Padded p(img, r);
    std::vector<double> spatial(window * window);
    for (std::size_t dy = 0; dy < window; ++dy) {
        for (std::size_t dx = 0; dx < window; ++dx) {
            const double ox = static_cast<double>(dx) - static_cast<double>(r);
            const double oy = static_cast<double>(dy) - static_cast<double>(r);
            spatial[dy * window + dx] = std::exp(-(ox * ox + oy * oy) / (2.0 * spatial_sigma * spatial_sigma));
        }
    }
    const double inv_range = 1.0 / (2.0 * range_sigma * range_sigma);
    return per_pixel(img, [&](std::size_t x, std::size_t y) {
        const double centre = p.at(x, y, r, r);
        double num = 0.0, den = 0.0;
        for (std::size_t dy = 0; dy < window; ++dy) {
            for (std::size_t dx = 0; dx < window; ++dx) {
                const double v = p.at(x, y, dx, dy);
                const double w = spatial[dy * window + dx] * std::exp(-(v - centre) * (v - centre) * inv_range);
                num += w * v;
                den += w;
            }
        }
        return num / den;
    });
}

std::string BaselineSetting::describe() const {
    std::ostringstream os;
    os << "window=" << window;
    if (method == "lee" || method == "kuan" || method == "lee_enhanced") os << ";looks=" << looks;
    if (method == "frost" || method == "lee_enhanced") os << ";damping=" << damping;
    if (method == "bilateral") os << ";range_fraction=" << range_fraction;
    return os.str();
}

const std::vector<std::string>& baseline_names() {
    static const std::vector<std::string> names{"lee", "lee_enhanced", "kuan", "frost", "mean", "median", "bilateral"};
    return names;
}

std::vector<BaselineSetting> baseline_sweep(const std::string& method, double looks) {
    if (std::find(baseline_names().begin(), baseline_names().end(), method) == baseline_names().end()) {
        throw InvalidArgument("unknown baseline method: " + method);
    }
    std::vector<BaselineSetting> out;
    for (std::size_t window : {5u, 7u, 9u}) {
        BaselineSetting s{method, window, looks, method == "lee_enhanced" ? 1.0 : 2.0, 0.5};
        if (method == "bilateral") {
            for (double fraction : {0.25, 0.5, 1.0}) {
                s.range_fraction = fraction;
                out.push_back(s);
            }
        } else {
            out.push_back(s);
        }
    }
    return out;
}

ImageGrid run_baseline(const ImageGrid& img, const BaselineSetting& s) {
    ImageGrid out(img.width(), img.height(), img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c) {
        const auto plane = img.channel(c);
        const ImageGrid single(img.width(), img.height(), 1, std::vector<float>(plane.begin(), plane.end()));
        const WindowSpec win{s.window};
        ImageGrid filtered;
        if (s.method == "mean") {
            filtered = mean_filter(single, win);
        } else if (s.method == "median") {
            filtered = median_filter(single, win);
        } else if (s.method == "lee") {
            filtered = lee_filter(single, win, s.looks);
        } else if (s.method == "kuan") {
            filtered = kuan_filter(single, win, s.looks);
        } else if (s.method == "lee_enhanced") {
            filtered = enhanced_lee_filter(single, win, s.looks, s.damping);
        } else if (s.method == "frost") {
            filtered = frost_filter(single, win, s.damping);
        } else if (s.method == "bilateral") {
            double mean = 0.0;
            for (float v : plane) mean += v;
            mean /= static_cast<double>(plane.size());
            const double range = std::max(1e-12, s.range_fraction * mean);
            filtered = bilateral_filter(single, static_cast<double>(s.window - 1) / 4.0, range, s.window);
        } else {
            throw InvalidArgument("unknown baseline method: " + s.method);
        }
        std::copy(filtered.data().begin(), filtered.data().end(), out.channel(c).begin());
    }
    return out;
}

} // namespace sard
