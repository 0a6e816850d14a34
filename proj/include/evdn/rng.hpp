#pragma once

#include <cstdint>

namespace evdn {

/// splitmix64 generator (Steele, Lea, Flood 2014). Chosen as the project-wide
/// PRNG because its output is a fixed function of the seed on every platform,
/// which keeps seeded generators and noise injection bit-reproducible.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Unbiased uniform integer in [0, bound); bound must be nonzero.
    std::uint64_t next_below(std::uint64_t bound) {
        // rejection sampling over the top of the range
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound + 1) % bound;
        std::uint64_t v = next();
        while (v > limit) {
            v = next();
        }
        return v % bound;
    }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool next_bool() { return (next() >> 63) != 0; }

private:
    std::uint64_t state_;
};

/// Deterministic seed derivation for sub-streams (per benchmark cell, per
/// noise level, ...). Mixes the parent seed with a stream tag.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    SplitMix64 mix(seed ^ (0xd1b54a32d192ed03ull * (stream + 1)));
    return mix.next();
}

}  // namespace evdn
