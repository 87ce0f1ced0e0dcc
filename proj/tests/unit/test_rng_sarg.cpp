#include "helpers.hpp"

#include "sard/error.hpp"
#include "sard/rng.hpp"
#include "sard/sarg.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <set>

using namespace sard;

TEST(Philox, KnownAnswerVectors) {
    using Ctr = std::array<std::uint32_t, 4>;
    EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}), (Ctr{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
              (Ctr{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
              (Ctr{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, DeterministicPerAddress) {
    CounterRng a(42, 3, 17), b(42, 3, 17), c(42, 4, 17);
    bool differs = false;
    for (int i = 0; i < 64; ++i) {
        const auto va = a.next_u32();
        EXPECT_EQ(va, b.next_u32());
        differs |= va != c.next_u32();
    }
    EXPECT_TRUE(differs);
}

TEST(CounterRng, UniformStrictlyInsideUnitInterval) {
    CounterRng rng(7, 0, 0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / 100000.0, 0.5, 0.005);
}

TEST(CounterRng, NormalMoments) {
    CounterRng rng(11, 1, 0);
    double s = 0.0, s2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(CounterRng, BelowStaysInRange) {
    CounterRng rng(5, 0, 0);
    std::set<std::uint32_t> seen;
    for (int i = 0; i < 1000; ++i) {
        const auto v = rng.below(4);
        ASSERT_LT(v, 4u);
        seen.insert(v);
    }
    EXPECT_EQ(seen.size(), 4u);
}

TEST(MixSeed, DistinctSalts) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t salt = 0; salt < 1000; ++salt) seen.insert(mix_seed(42, salt));
    EXPECT_EQ(seen.size(), 1000u);
    EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
}

TEST(Sarg, HeaderByteLayout) {
    ImageGrid img(3, 2, 1);
    for (std::size_t i = 0; i < img.size(); ++i) img.data()[i] = static_cast<float>(i) * 0.5f;
    const std::vector<ImageGrid> frames{img};
    const auto bytes = encode_sarg(frames);
    ASSERT_EQ(bytes.size(), sarg::kHeaderBytes + 6 * 4);
    EXPECT_EQ(std::memcmp(bytes.data(), "SARG", 4), 0);
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[5], 1);
    EXPECT_EQ(bytes[6], 0);
    EXPECT_EQ(bytes[7], 0);
    const std::uint8_t dims[16] = {1, 0, 0, 0, 3, 0, 0, 0, 2, 0, 0, 0, 1, 0, 0, 0};
    EXPECT_EQ(std::memcmp(bytes.data() + 8, dims, 16), 0);
    float second = 0.0f;
    std::memcpy(&second, bytes.data() + sarg::kHeaderBytes + 4, 4);
    EXPECT_EQ(second, 0.5f);
}

TEST(Sarg, RoundTripIsBitExact) {
    std::vector<ImageGrid> frames;
    for (std::uint64_t t = 0; t < 3; ++t) frames.push_back(test::random_image(7, 5, 2, t, -10.0f, 10.0f));
    const auto decoded = decode_sarg(encode_sarg(frames));
    ASSERT_EQ(decoded.size(), 3u);
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(decoded[t], frames[t]);
}

TEST(Sarg, RejectsCorruption) {
    const std::vector<ImageGrid> frames{ImageGrid(4, 4, 1, 1.0f)};
    auto bytes = encode_sarg(frames);
    auto truncated = bytes;
    truncated.resize(truncated.size() - 1);
    EXPECT_THROW(decode_sarg(truncated), CorruptFileError);
    auto magic = bytes;
    magic[0] = 'X';
    EXPECT_THROW(decode_sarg(magic), CorruptFileError);
    auto version = bytes;
    version[4] = 2;
    EXPECT_THROW(decode_sarg(version), CorruptFileError);
    auto dtype = bytes;
    dtype[5] = 9;
    EXPECT_THROW(decode_sarg(dtype), CorruptFileError);
    auto reserved = bytes;
    reserved[7] = 1;
    EXPECT_THROW(decode_sarg(reserved), CorruptFileError);
    EXPECT_THROW(decode_sarg(std::vector<std::uint8_t>(10, 0)), CorruptFileError);
}

TEST(Sarg, SingleImageReaderRejectsStacks) {
    const auto dir = std::filesystem::temp_directory_path() / "sard_test_sarg";
    std::filesystem::create_directories(dir);
    const std::vector<ImageGrid> frames{ImageGrid(2, 2, 1, 1.0f), ImageGrid(2, 2, 1, 2.0f)};
    write_sarg(dir / "stack.sarg", frames);
    EXPECT_EQ(read_sarg_frames(dir / "stack.sarg").size(), 2u);
    EXPECT_THROW(read_sarg(dir / "stack.sarg"), CorruptFileError);
    write_sarg(dir / "one.sarg", frames[1]);
    EXPECT_EQ(read_sarg(dir / "one.sarg"), frames[1]);
    EXPECT_THROW(read_sarg(dir / "missing.sarg"), DataError);
    std::filesystem::remove_all(dir);
}
