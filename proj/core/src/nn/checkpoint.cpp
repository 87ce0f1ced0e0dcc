#include "sard/nn/checkpoint.hpp"

#include "sard/error.hpp"
#include "sard/sarg.hpp"

#include <bit>
#include <cstring>

namespace sard::nn {

namespace {

constexpr char kMagic[4] = {'S', 'A', 'R', 'C'};
constexpr std::uint8_t kDtypeFloat32 = 1;
constexpr std::size_t kFixedBytes = 12;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<std::uint8_t>(v >> s));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_floats(std::vector<std::uint8_t>& out, const std::vector<float>& values) {
    for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
}

void get_floats(const std::uint8_t* p, std::vector<float>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::bit_cast<float>(get_u32(p + 4 * i));
}

} // namespace

std::vector<std::uint8_t> encode_checkpoint(const Model& model) {
    const Network& net = model.network;
    nlohmann::json blocks = nlohmann::json::array();
    for (const auto& b : net.param_blocks()) blocks.push_back({{"name", b.name}, {"offset", b.offset}, {"size", b.size}});
    nlohmann::json header = {
        {"format", "sard-checkpoint"},
        {"version", kCheckpointVersion},
        {"layout", net.layout()},
        {"parameter_count", net.parameter_count()},
        {"buffer_count", net.buffers().size()},
        {"blocks", blocks},
        {"train_config", model.config},
        {"normalization", model.normalization ? nlohmann::json(*model.normalization) : nlohmann::json(nullptr)},
        {"clip", model.clip},
        {"seed", model.config.seed},
        {"epochs_trained", model.epochs_trained},
    };
    const std::string text = header.dump();
    std::vector<std::uint8_t> out(kMagic, kMagic + 4);
    out.push_back(kCheckpointVersion);
    out.push_back(kDtypeFloat32);
    out.push_back(0);
    out.push_back(0);
    put_u32(out, static_cast<std::uint32_t>(text.size()));
    out.insert(out.end(), text.begin(), text.end());
    out.reserve(out.size() + 4 * (net.params().size() + net.buffers().size()));
    put_floats(out, net.params());
    put_floats(out, net.buffers());
    return out;
}

Model decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFixedBytes) throw CorruptFileError("checkpoint: truncated header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw CorruptFileError("checkpoint: bad magic");
    if (bytes[4] != kCheckpointVersion) {
        throw CorruptFileError("checkpoint: unsupported version " + std::to_string(bytes[4]));
    }
    if (bytes[5] != kDtypeFloat32) throw CorruptFileError("checkpoint: unsupported dtype");
    if (bytes[6] != 0 || bytes[7] != 0) throw CorruptFileError("checkpoint: reserved bytes not zero");
    const std::size_t header_len = get_u32(bytes.data() + 8);
    if (bytes.size() < kFixedBytes + header_len) throw CorruptFileError("checkpoint: truncated header");
    nlohmann::json header;
    Model model;
    try {
        header = nlohmann::json::parse(bytes.begin() + kFixedBytes, bytes.begin() + kFixedBytes + header_len);
        if (header.at("format") != "sard-checkpoint") throw CorruptFileError("checkpoint: wrong format tag");
        if (header.at("version").get<int>() != kCheckpointVersion) {
            throw CorruptFileError("checkpoint: header version mismatch");
        }
        model.network = Network(header.at("layout").get<NetworkLayout>());
        model.config = header.at("train_config").get<TrainConfig>();
        if (!header.at("normalization").is_null()) {
            model.normalization = header.at("normalization").get<NormalizationParams>();
        }
        model.clip = header.at("clip").get<ClipPolicy>();
        model.epochs_trained = header.at("epochs_trained").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError(std::string("checkpoint: invalid header: ") + e.what());
    } catch (const InvalidArgument& e) {
        throw CorruptFileError(std::string("checkpoint: invalid header: ") + e.what());
    }
    Network& net = model.network;
    if (header.at("parameter_count").get<std::size_t>() != net.parameter_count() ||
        header.at("buffer_count").get<std::size_t>() != net.buffers().size()) {
        throw CorruptFileError("checkpoint: parameter counts do not match the layout");
    }
    const std::size_t body = 4 * (net.params().size() + net.buffers().size());
    if (bytes.size() != kFixedBytes + header_len + body) throw CorruptFileError("checkpoint: payload size mismatch");
    const std::uint8_t* p = bytes.data() + kFixedBytes + header_len;
    get_floats(p, net.params());
    get_floats(p + 4 * net.params().size(), net.buffers());
    return model;
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
    write_file_bytes(path, encode_checkpoint(model));
}

Model load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

} // namespace sard::nn
