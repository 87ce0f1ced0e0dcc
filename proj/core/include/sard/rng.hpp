#pragma once

#include <array>
#include <cstdint>

namespace sard {

/// Philox4x32-10 counter-based block cipher (Salmon et al., SC'11).
/// Output is a pure function of (counter, key), so streams are identical on every platform
/// and any element of a stream can be generated independently.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer used to derive independent seeds (e.g. per sample, per epoch).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Sequential generator over one Philox stream addressed by (seed, stream, index).
///
/// Counter words are [index_lo, index_hi, stream, block]; the block word advances as
/// draws are consumed. Distinct (stream, index) pairs never share a counter.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint32_t stream, std::uint64_t index);

    std::uint32_t next_u32();
    std::uint64_t next_u64();

    /// Uniform double strictly inside (0, 1).
    double uniform();

    /// Standard normal via Box-Muller; the paired variate is cached.
    double normal();

    /// Uniform integer in [0, bound).
    std::uint32_t below(std::uint32_t bound);

private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace sard
