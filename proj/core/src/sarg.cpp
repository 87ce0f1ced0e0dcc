#include "sard/sarg.hpp"

#include "sard/error.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>

namespace sard {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
    return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xFFFFFFFFu) throw InvalidArgument(std::string("SARG: ") + what + " exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
}

} // namespace

std::vector<std::uint8_t> encode_sarg(std::span<const ImageGrid> frames) {
    if (frames.empty()) throw InvalidArgument("SARG: at least one frame required");
    const ImageGrid& first = frames.front();
    for (const auto& f : frames) {
        if (!f.same_shape(first)) throw InvalidArgument("SARG: frames must share dimensions");
    }
    const std::uint8_t lead[8] = {'S', 'A', 'R', 'G', sarg::kVersion, sarg::kDtypeFloat32, 0, 0};
    std::vector<std::uint8_t> out(lead, lead + 8);
    out.reserve(sarg::kHeaderBytes + frames.size() * first.size() * 4);
    put_u32(out, checked_u32(frames.size(), "T"));
    put_u32(out, checked_u32(first.width(), "W"));
    put_u32(out, checked_u32(first.height(), "H"));
    put_u32(out, checked_u32(first.channels(), "C"));
    for (const auto& f : frames) {
        for (float v : f.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

std::vector<ImageGrid> decode_sarg(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sarg::kHeaderBytes) throw CorruptFileError("SARG: truncated header");
    if (std::memcmp(bytes.data(), "SARG", 4) != 0) throw CorruptFileError("SARG: bad magic");
    if (bytes[4] != sarg::kVersion) {
        throw CorruptFileError("SARG: unsupported version " + std::to_string(bytes[4]));
    }
    if (bytes[5] != sarg::kDtypeFloat32) {
        throw CorruptFileError("SARG: unsupported dtype " + std::to_string(bytes[5]));
    }
    if (bytes[6] != 0 || bytes[7] != 0) throw CorruptFileError("SARG: reserved bytes must be zero");
    const std::uint64_t t = get_u32(bytes, 8);
    const std::uint64_t w = get_u32(bytes, 12);
    const std::uint64_t h = get_u32(bytes, 16);
    const std::uint64_t c = get_u32(bytes, 20);
    if (t == 0 || w == 0 || h == 0 || c == 0) throw CorruptFileError("SARG: zero dimension");
    const std::uint64_t per_frame = w * h * c;
    const std::uint64_t expected = sarg::kHeaderBytes + t * per_frame * 4;
    if (bytes.size() != expected) {
        throw CorruptFileError("SARG: expected " + std::to_string(expected) + " bytes, found " +
                               std::to_string(bytes.size()));
    }
    std::vector<ImageGrid> frames;
    frames.reserve(t);
    std::size_t offset = sarg::kHeaderBytes;
    for (std::uint64_t f = 0; f < t; ++f) {
        std::vector<float> data(per_frame);
        for (auto& v : data) {
            v = std::bit_cast<float>(get_u32(bytes, offset));
            offset += 4;
        }
        frames.emplace_back(w, h, c, std::move(data));
    }
    return frames;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for " + path.string());
}

void write_sarg(const std::filesystem::path& path, std::span<const ImageGrid> frames) {
    write_file_bytes(path, encode_sarg(frames));
}

void write_sarg(const std::filesystem::path& path, const ImageGrid& image) {
    write_sarg(path, std::span<const ImageGrid>(&image, 1));
}

std::vector<ImageGrid> read_sarg_frames(const std::filesystem::path& path) {
    try {
        return decode_sarg(read_file_bytes(path));
    } catch (const CorruptFileError& e) {
        throw CorruptFileError(path.string() + ": " + e.what());
    }
}

ImageGrid read_sarg(const std::filesystem::path& path) {
    auto frames = read_sarg_frames(path);
    if (frames.size() != 1) {
        throw CorruptFileError(path.string() + ": expected a single image, found T=" +
                               std::to_string(frames.size()));
    }
    return std::move(frames.front());
}

void write_png(const std::filesystem::path& path, const ImageGrid& image, std::size_t channel) {
    const auto plane = image.channel(channel);
    const float lo = percentile_value(plane, 2.0);
    const float hi = percentile_value(plane, 98.0);
    const float scale = hi > lo ? 255.0f / (hi - lo) : 0.0f;

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
    if (!file) throw DataError("cannot write " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng initialization failed");
    }
    std::vector<png_byte> row(image.width());
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng failed writing " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()), static_cast<png_uint_32>(image.height()), 8,
                 PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (std::size_t y = 0; y < image.height(); ++y) {
        for (std::size_t x = 0; x < image.width(); ++x) {
            const float v = (image.at(x, y, channel) - lo) * scale;
            row[x] = static_cast<png_byte>(std::clamp(std::lround(v), 0L, 255L));
        }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace sard
