#include "sard/archive.hpp"

#include "sard/error.hpp"
#include "sard/parallel.hpp"
#include "sard/rng.hpp"
#include "sard/sarg.hpp"

#include <cstdio>
#include <fstream>

namespace sard {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kFormat = "sard-archive";

nlohmann::json entry_json(const ArchiveEntry& e) {
    return nlohmann::json{{"id", e.id},
                          {"input", e.id + "_input.sarg"},
                          {"truth", e.id + "_truth.sarg"},
                          {"split", e.split},
                          {"noise", e.pair.noise},
                          {"width", e.pair.truth.width()},
                          {"height", e.pair.truth.height()},
                          {"channels", e.pair.truth.channels()}};
}

void write_manifest(const fs::path& dir, const nlohmann::json& manifest) {
    const std::string text = manifest.dump(2) + "\n";
    write_file_bytes(dir / kManifest, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

nlohmann::json base_manifest(const Archive& archive) {
    nlohmann::json m{{"format", kFormat}, {"version", kArchiveVersion}, {"clip", archive.clip}};
    m["normalization"] = archive.normalization ? nlohmann::json(*archive.normalization) : nlohmann::json(nullptr);
    m["split_spec"] = archive.split_spec ? nlohmann::json(*archive.split_spec) : nlohmann::json(nullptr);
    return m;
}

void set_counts(nlohmann::json& m) {
    nlohmann::json counts = {{"train", 0}, {"val", 0}, {"test", 0}};
    for (const auto& je : m.at("entries")) {
        const std::string split = je.value("split", std::string{});
        if (counts.contains(split)) counts[split] = counts[split].get<std::size_t>() + 1;
    }
    m["count"] = m.at("entries").size();
    m["split_counts"] = counts;
}

void write_entry_files(const fs::path& dir, const ArchiveEntry& e) {
    if (!e.pair.input.same_shape(e.pair.truth)) {
        throw InvalidArgument("archive entry " + e.id + ": input/truth shape mismatch");
    }
    write_sarg(dir / (e.id + "_input.sarg"), e.pair.input);
    write_sarg(dir / (e.id + "_truth.sarg"), e.pair.truth);
}

} // namespace

std::vector<std::size_t> Archive::indices_in(const std::string& split) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (entries[i].split == split) out.push_back(i);
    }
    return out;
}

void write_archive(const Archive& archive, const fs::path& dir) {
    fs::create_directories(dir);
    nlohmann::json m = base_manifest(archive);
    m["entries"] = nlohmann::json::array();
    for (const auto& e : archive.entries) {
        write_entry_files(dir, e);
        m["entries"].push_back(entry_json(e));
    }
    set_counts(m);
    write_manifest(dir, m);
}

nlohmann::json read_manifest(const fs::path& dir) {
    const fs::path path = dir / kManifest;
    if (!fs::exists(path)) throw CorruptFileError("archive " + dir.string() + ": missing manifest.json");
    nlohmann::json m;
    try {
        std::ifstream in(path);
        m = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError("archive " + dir.string() + ": unreadable manifest: " + e.what());
    }
    if (m.value("format", std::string{}) != kFormat) {
        throw CorruptFileError("archive " + dir.string() + ": not a sard archive");
    }
    if (m.value("version", -1) != kArchiveVersion) {
        throw CorruptFileError("archive " + dir.string() + ": unsupported version " +
                               std::to_string(m.value("version", -1)));
    }
    return m;
}

Archive read_archive(const fs::path& dir) {
    const nlohmann::json m = read_manifest(dir);
    Archive archive;
    try {
        if (m.contains("clip")) m.at("clip").get_to(archive.clip);
        if (m.contains("normalization") && !m.at("normalization").is_null()) {
            archive.normalization = m.at("normalization").get<NormalizationParams>();
        }
        if (m.contains("split_spec") && !m.at("split_spec").is_null()) {
            archive.split_spec = m.at("split_spec").get<SplitSpec>();
        }
        const auto& entries = m.at("entries");
        if (m.value("count", entries.size()) != entries.size()) {
            throw CorruptFileError("archive " + dir.string() + ": manifest count disagrees with entries");
        }
        for (const auto& je : entries) {
            ArchiveEntry e;
            e.id = je.at("id").get<std::string>();
            e.split = je.value("split", std::string{});
            e.pair.noise = je.at("noise").get<SpeckleConfig>();
            e.pair.input = read_sarg(dir / je.at("input").get<std::string>());
            e.pair.truth = read_sarg(dir / je.at("truth").get<std::string>());
            if (!e.pair.input.same_shape(e.pair.truth)) {
                throw CorruptFileError("archive entry " + e.id + ": input/truth shape mismatch");
            }
            archive.entries.push_back(std::move(e));
        }
    } catch (const nlohmann::json::exception& e) {
        throw CorruptFileError("archive " + dir.string() + ": malformed manifest: " + e.what());
    } catch (const DataError& e) {
        if (dynamic_cast<const CorruptFileError*>(&e)) throw;
        throw CorruptFileError("archive " + dir.string() + ": " + e.what());
    }
    return archive;
}

void append_to_archive(const fs::path& dir, const ArchiveEntry& entry) {
    nlohmann::json m;
    if (fs::exists(dir / kManifest)) {
        m = read_manifest(dir);
    } else {
        fs::create_directories(dir);
        m = base_manifest(Archive{});
        m["entries"] = nlohmann::json::array();
    }
    for (const auto& je : m.at("entries")) {
        if (je.at("id").get<std::string>() == entry.id) {
            throw InvalidArgument("archive already holds an entry with id " + entry.id);
        }
    }
    write_entry_files(dir, entry);
    m["entries"].push_back(entry_json(entry));
    set_counts(m);
    write_manifest(dir, m);
}

Archive assemble_archive(std::vector<std::pair<std::string, ImageGrid>> truths, std::uint32_t looks,
                         std::uint64_t seed, const SplitSpec& split, ClipPolicy clip) {
    const SplitIndices parts = split_dataset(truths.size(), split);
    Archive archive;
    archive.entries.resize(truths.size());
    parallel_for(truths.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            SpeckleConfig noise;
            noise.looks = looks;
            noise.seed = mix_seed(seed, i);
            archive.entries[i] = {truths[i].first, "", synthesize_pair(truths[i].second, noise)};
        }
    });
    for (std::size_t i : parts.train) archive.entries[i].split = "train";
    for (std::size_t i : parts.val) archive.entries[i].split = "val";
    for (std::size_t i : parts.test) archive.entries[i].split = "test";
    std::vector<SamplePair> pairs;
    pairs.reserve(archive.entries.size());
    for (const auto& e : archive.entries) pairs.push_back(e.pair);
    archive.clip = resolve_clip_policy(clip, pairs);
    archive.normalization = dataset_normalization(pairs, archive.clip);
    archive.split_spec = split;
    return archive;
}

void to_json(nlohmann::json& j, const SyntheticDatasetOptions& o) {
    j = {{"count", o.count},
         {"width", o.field.width},
         {"height", o.field.height},
         {"channels", o.field.channels},
         {"min_shapes", o.field.min_shapes},
         {"max_shapes", o.field.max_shapes},
         {"frames", o.frames},
         {"looks", o.looks},
         {"seed", o.seed},
         {"split", o.split},
         {"clip", o.clip}};
}

Archive synthetic_archive(const SyntheticDatasetOptions& options) {
    if (options.count < 3) throw InvalidArgument("synthetic dataset: need at least 3 images");
    std::vector<std::pair<std::string, ImageGrid>> truths(options.count);
    parallel_for(options.count, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
            char id[32];
            std::snprintf(id, sizeof id, "s%04zu", i);
            ImageGrid truth = synthetic_truth(options.field, mix_seed(options.seed, 0x7700000 + i));
            if (options.frames > 0) {
                truth = temporal_average(synthetic_stack(truth, options.frames, options.looks,
                                                         mix_seed(options.seed, 0x7800000 + i)));
            }
            truths[i] = {id, std::move(truth)};
        }
    });
    return assemble_archive(std::move(truths), options.looks, mix_seed(options.seed, 0x7900000), options.split,
                            options.clip);
}

} // namespace sard
