#pragma once

#include "sard/dataset.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sard {

inline constexpr int kArchiveVersion = 1;

struct ArchiveEntry {
    std::string id;
    std::string split; // "train", "val", "test" or empty
    SamplePair pair;
};

/// A dataset on disk: one directory holding "<id>_input.sarg" / "<id>_truth.sarg" per entry
/// and a "manifest.json" with roles, split membership, noise configs, the clip policy and
/// the dataset-global normalization range.
struct Archive {
    std::vector<ArchiveEntry> entries;
    std::optional<NormalizationParams> normalization;
    ClipPolicy clip;
    std::optional<SplitSpec> split_spec;

    std::vector<std::size_t> indices_in(const std::string& split) const;
};

void write_archive(const Archive& archive, const std::filesystem::path& dir);

/// Throws CorruptFileError for a missing/invalid manifest, version mismatch, missing or
/// truncated entry files, and entries whose input and truth shapes differ.
Archive read_archive(const std::filesystem::path& dir);

/// Adds one entry to an existing archive directory (creating it if absent) and rewrites the manifest.
void append_to_archive(const std::filesystem::path& dir, const ArchiveEntry& entry);

nlohmann::json read_manifest(const std::filesystem::path& dir);

/// Builds an archive from ground-truth images: entry i gets Gamma(looks) speckle seeded by
/// mix_seed(seed, i), split membership from `split`, the resolved clip policy, and the
/// dataset-wide normalization range over every clipped input and truth.
Archive assemble_archive(std::vector<std::pair<std::string, ImageGrid>> truths, std::uint32_t looks,
                         std::uint64_t seed, const SplitSpec& split, ClipPolicy clip);

struct SyntheticDatasetOptions {
    std::size_t count = 200;
    SyntheticFieldOptions field;
    /// 0 uses the synthetic field as truth; T > 0 replaces it by the temporal average of T
    /// independently speckled looks, mimicking the time-series pipeline.
    std::size_t frames = 0;
    std::uint32_t looks = 4;
    std::uint64_t seed = 0;
    SplitSpec split;
    ClipPolicy clip;
};

void to_json(nlohmann::json& j, const SyntheticDatasetOptions& o);

/// Synthetic truths named "s0000", "s0001", ... assembled as above.
Archive synthetic_archive(const SyntheticDatasetOptions& options);

} // namespace sard
