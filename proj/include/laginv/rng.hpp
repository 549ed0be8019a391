#pragma once

// Portable random streams: SplitMix64 for seeding and stream derivation,
// xoshiro256** for draws. Both are fully specified by their reference
// algorithms, so a seed reproduces the same numbers on any platform or in
// any language.

#include <array>
#include <cstdint>

namespace laginv {

inline constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class splitmix64 {
public:
    explicit constexpr splitmix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return splitmix64_mix(state_);
    }

private:
    std::uint64_t state_;
};

class xoshiro256ss {
public:
    using result_type = std::uint64_t;

    explicit constexpr xoshiro256ss(std::uint64_t seed) noexcept : s_{} {
        splitmix64 sm(seed);
        for (auto& w : s_)
            w = sm.next();
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }

    constexpr result_type operator()() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Independent stream number k derived from a master seed.
    static constexpr xoshiro256ss substream(std::uint64_t seed, std::uint64_t k) noexcept {
        return xoshiro256ss(splitmix64_mix(seed ^ splitmix64_mix(k + 0x9E3779B97F4A7C15ULL)));
    }

private:
    std::array<std::uint64_t, 4> s_;

    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }
};

} // namespace laginv
