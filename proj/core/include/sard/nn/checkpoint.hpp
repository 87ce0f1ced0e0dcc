#pragma once

#include "sard/nn/train.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sard::nn {

/// Checkpoint container (little-endian):
///   bytes 0-3   "SARC"
///   byte  4     version = 1
///   byte  5     dtype = 1 (float32)
///   bytes 6-7   reserved, zero
///   u32 header length, then that many bytes of UTF-8 JSON (layout, parameter blocks and
///   counts, train config, normalization, clip policy, seed)
///   parameter_count float32 trainable values, then buffer_count float32 BN buffers
inline constexpr std::uint8_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Model& model);
Model decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Model& model);
/// Throws CorruptFileError on bad magic, version mismatch, truncation or inconsistent counts.
Model load_checkpoint(const std::filesystem::path& path);

} // namespace sard::nn
