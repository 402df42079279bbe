#pragma once

// Counter-based random streams (Philox4x32-10). A stream is addressed by
// (seed, trajectory, purpose); distinct addresses give independent
// substreams regardless of the order in which they are consumed.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace pdmp_seasons {

/// Philox4x32 with 10 rounds; output matches the Random123 reference.
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) noexcept
{
    constexpr std::uint32_t m0 = 0xD2511F53u;
    constexpr std::uint32_t m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u;
    constexpr std::uint32_t w1 = 0xBB67AE85u;

    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += w0;
            key[1] += w1;
        }
        const std::uint64_t p0 = std::uint64_t{m0} * ctr[0];
        const std::uint64_t p1 = std::uint64_t{m1} * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

/// Well-known purposes a trajectory draws randomness for.
enum class StreamPurpose : std::uint32_t {
    thinning = 0,
    loss = 1,
    rchain = 2,
};

/// UniformRandomBitGenerator over a single Philox substream.
class RandomStream {
public:
    using result_type = std::uint64_t;

    RandomStream(std::uint64_t seed, std::uint32_t trajectory, std::uint32_t purpose) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          trajectory_(trajectory),
          purpose_(purpose)
    {
    }

    RandomStream(std::uint64_t seed, std::uint32_t trajectory, StreamPurpose purpose) noexcept
        : RandomStream(seed, trajectory, static_cast<std::uint32_t>(purpose))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        if (used_ == 4)
            refill();
        const std::uint64_t hi = buffer_[used_++];
        const std::uint64_t lo = buffer_[used_++];
        return (hi << 32) | lo;
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept
    {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential with unit mean.
    double exponential() noexcept { return -std::log(uniform()); }

    std::uint64_t blocks_consumed() const noexcept { return block_; }

private:
    void refill() noexcept
    {
        buffer_ = philox4x32_10({static_cast<std::uint32_t>(block_),
                                 static_cast<std::uint32_t>(block_ >> 32), trajectory_, purpose_},
                                key_);
        ++block_;
        used_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t trajectory_;
    std::uint32_t purpose_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

} // namespace pdmp_seasons
