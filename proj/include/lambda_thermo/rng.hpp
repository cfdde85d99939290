#pragma once

// Portable counter-based generator: output n of stream `key` is
// splitmix64_mix(key + n·γ), γ the golden-ratio increment, with
// key = mix(mix(seed) ⊕ index). Hashing the seed first keeps nearby seeds
// from sharing walker streams (plain seed ⊕ index maps (s, 1) onto (s⊕1, 0)).
// A stream is fully determined by (seed, index), so walkers can run on any
// thread in any order.

#include <cstdint>
#include <limits>

namespace lambda_thermo {

constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class StreamRng {
public:
    using result_type = std::uint64_t;

    constexpr StreamRng(std::uint64_t seed, std::uint64_t index) noexcept
        : key_(splitmix64_mix(splitmix64_mix(seed) ^ index)) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept
    {
        ++counter_;
        return splitmix64_mix(key_ + counter_ * kGoldenGamma);
    }

    /// Uniform on (0,1] with 53 random bits.
    constexpr double uniform() noexcept
    {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1p-53;
    }

    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace lambda_thermo
