#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace mmenc {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the output
/// depends only on (counter, key), which is what makes every random draw in the
/// engine addressable by index and therefore independent of execution order.
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

constexpr PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept
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

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// FNV-1a over a byte string; used to turn identifiers (layer ids, test names)
/// into stream keys.
constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ull) noexcept
{
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ull;
    }
    return h;
}

/// Combine stream identifiers into one 64-bit stream key.
constexpr std::uint64_t stream_key(std::uint64_t a, std::uint64_t b) noexcept
{
    return splitmix64(a ^ splitmix64(b + 0x632BE59BD9B4E019ull));
}

/// Counter-based generator: draw(stream, index) is a pure function of
/// (seed, stream, index).
class CounterRng
{
public:
    constexpr explicit CounterRng(std::uint64_t seed) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)}
    {
    }

    constexpr std::array<std::uint64_t, 2> block(std::uint64_t stream, std::uint64_t index) const noexcept
    {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                                static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
        const auto out = philox4x32_10(ctr, key_);
        return {(std::uint64_t{out[1]} << 32) | out[0], (std::uint64_t{out[3]} << 32) | out[2]};
    }

    constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const noexcept
    {
        return block(stream, index)[0];
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t stream, std::uint64_t index) const noexcept
    {
        return static_cast<double>(bits(stream, index) >> 11) * 0x1.0p-53;
    }

    /// Uniform integer on [0, n) by 64x64 multiply-shift; bias is below n / 2^64.
    std::uint64_t below(std::uint64_t n, std::uint64_t stream, std::uint64_t index) const noexcept
    {
        const unsigned __int128 prod = static_cast<unsigned __int128>(bits(stream, index)) * n;
        return static_cast<std::uint64_t>(prod >> 64);
    }

    /// Standard normal via Box-Muller on one Philox block.
    double normal(std::uint64_t stream, std::uint64_t index) const noexcept
    {
        const auto b = block(stream, index);
        const double u1 = (static_cast<double>(b[0] >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = static_cast<double>(b[1] >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    PhiloxKey key_;
};

}  // namespace mmenc
