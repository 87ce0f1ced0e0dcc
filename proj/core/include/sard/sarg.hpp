#pragma once

#include "sard/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace sard {

/// SARG raw-grid layout (all integers and reals little-endian):
///   bytes 0-3   "SARG"
///   byte  4     version = 1
///   byte  5     dtype = 1 (float32)
///   bytes 6-7   reserved, zero
///   u32 T, u32 W, u32 H, u32 C
///   T*C*H*W float32 values: time-major, channel-planar, row-major
namespace sarg {
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;
inline constexpr std::size_t kHeaderBytes = 24;
} // namespace sarg

std::vector<std::uint8_t> encode_sarg(std::span<const ImageGrid> frames);
std::vector<ImageGrid> decode_sarg(std::span<const std::uint8_t> bytes);

void write_sarg(const std::filesystem::path& path, std::span<const ImageGrid> frames);
void write_sarg(const std::filesystem::path& path, const ImageGrid& image);

/// Reads every frame. Throws CorruptFileError on bad magic/version/dtype or size mismatch.
std::vector<ImageGrid> read_sarg_frames(const std::filesystem::path& path);

/// Reads a single image; a file with T != 1 is rejected.
ImageGrid read_sarg(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// 8-bit grayscale PNG of one channel after a 2nd-98th percentile display stretch.
/// For inspection only; not a round-trip format.
void write_png(const std::filesystem::path& path, const ImageGrid& image, std::size_t channel = 0);

} // namespace sard
