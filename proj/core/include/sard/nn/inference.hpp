#pragma once

#include "sard/nn/train.hpp"

#include <optional>

namespace sard::nn {

/// Scene tiling. Each tile is run with `halo` pixels of extra context on every side
/// (default: the network's receptive radius), so tiles agree with a single pass over the
/// whole scene; overlapping tiles are blended with linear ramps.
struct TileOptions {
    std::size_t tile = 96;
    std::size_t overlap = 8;
    std::optional<std::size_t> halo;
};

/// Start offsets of tiles of length `tile` covering [0, extent) with at least `overlap` shared pixels.
std::vector<std::size_t> tile_starts(std::size_t extent, std::size_t tile, std::size_t overlap);

/// Filtered image in the normalized domain from a normalized input, tile by tile.
ImageGrid predict(const Network& net, const ImageGrid& normalized, const TileOptions& tiles = {});

/// The same in one forward pass over the whole image.
ImageGrid predict_single_pass(const Network& net, const ImageGrid& normalized);

/// clip -> normalize -> predict -> denormalize with the model's persisted parameters.
/// A model without normalization parameters is rejected.
ImageGrid despeckle(const Model& model, const ImageGrid& raw, const TileOptions& tiles = {});

} // namespace sard::nn
