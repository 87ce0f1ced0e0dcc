#include "sard/nn/inference.hpp"

#include "sard/error.hpp"

#include <algorithm>

namespace sard::nn {

namespace {

/// Linear ramp over `overlap` pixels on every side shared with a neighbouring tile.
double ramp(std::size_t pos, std::size_t start, std::size_t end, std::size_t extent, std::size_t overlap) {
    double w = 1.0;
    const double span = static_cast<double>(overlap + 1);
    if (start > 0) w = std::min(w, static_cast<double>(pos - start + 1) / span);
    if (end < extent) w = std::min(w, static_cast<double>(end - pos) / span);
    return w;
}

} // namespace

std::vector<std::size_t> tile_starts(std::size_t extent, std::size_t tile, std::size_t overlap) {
    if (tile == 0 || overlap >= tile) throw InvalidArgument("tiling: need 0 <= overlap < tile");
    if (extent <= tile) return {0};
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + tile < extent; s += tile - overlap) starts.push_back(s);
    if (starts.back() != extent - tile) starts.push_back(extent - tile);
    return starts;
}

ImageGrid predict_single_pass(const Network& net, const ImageGrid& normalized) {
    const std::vector<ImageGrid> in{normalized};
    Tensor out;
    net.infer(to_tensor<float>(in), out);
    return to_image(out, 0);
}

ImageGrid predict(const Network& net, const ImageGrid& normalized, const TileOptions& tiles) {
    const std::size_t w = normalized.width(), h = normalized.height(), c = normalized.channels();
    const auto xs = tile_starts(w, tiles.tile, tiles.overlap);
    const auto ys = tile_starts(h, tiles.tile, tiles.overlap);
    if (xs.size() == 1 && ys.size() == 1) return predict_single_pass(net, normalized);
    const std::size_t halo = tiles.halo.value_or(net.layout().receptive_radius());

    std::vector<double> acc(normalized.size(), 0.0);
    std::vector<double> weight(w * h, 0.0);
    InferenceWorkspace<float> ws;
    Tensor x, out;
    for (std::size_t y0 : ys) {
        const std::size_t y1 = std::min(h, y0 + tiles.tile);
        const std::size_t ey0 = y0 > halo ? y0 - halo : 0;
        const std::size_t ey1 = std::min(h, y1 + halo);
        for (std::size_t x0 : xs) {
            const std::size_t x1 = std::min(w, x0 + tiles.tile);
            const std::size_t ex0 = x0 > halo ? x0 - halo : 0;
            const std::size_t ex1 = std::min(w, x1 + halo);
            x.resize(1, ey1 - ey0, ex1 - ex0, c);
            for (std::size_t ch = 0; ch < c; ++ch) {
                for (std::size_t yy = ey0; yy < ey1; ++yy) {
                    for (std::size_t xx = ex0; xx < ex1; ++xx) {
                        x.at(0, yy - ey0, xx - ex0, ch) = normalized.at(xx, yy, ch);
                    }
                }
            }
            net.infer(x, out, ws);
            for (std::size_t yy = y0; yy < y1; ++yy) {
                const double wy = ramp(yy, y0, y1, h, tiles.overlap);
                for (std::size_t xx = x0; xx < x1; ++xx) {
                    const double wt = wy * ramp(xx, x0, x1, w, tiles.overlap);
                    weight[yy * w + xx] += wt;
                    for (std::size_t ch = 0; ch < c; ++ch) {
                        acc[(ch * h + yy) * w + xx] += wt * out.at(0, yy - ey0, xx - ex0, ch);
                    }
                }
            }
        }
    }
    ImageGrid result(w, h, c);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t i = 0; i < w * h; ++i) {
            result.data()[ch * w * h + i] = static_cast<float>(acc[ch * w * h + i] / weight[i]);
        }
    }
    return result;
}

ImageGrid despeckle(const Model& model, const ImageGrid& raw, const TileOptions& tiles) {
    if (!model.normalization) throw InvalidArgument("despeckle: model has no normalization parameters");
    const ImageGrid normalized = prepare_for_model(raw, model.clip, ImageRole::Input, *model.normalization);
    return denormalize(predict(model.network, normalized, tiles), *model.normalization);
}

} // namespace sard::nn
