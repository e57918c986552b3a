#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace stripsviz {

// SplitMix64 (Steele, Lea, Flood 2014). Tiny state, identical output on every
// platform, and good enough to seed and to drive uniform sampling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    std::uint64_t next() noexcept {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform in [0, bound); rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound) noexcept {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            const std::uint64_t r = next();
            if (r >= threshold) return r % bound;
        }
    }

private:
    std::uint64_t state_;
};

// Stream splitting rule: stream k of seed s is SplitMix64 seeded with
// mix(s) ^ mix(k + 1). Stream 0 initializes coordinates; stream t + 1 drives
// iteration t. Every consumer derives its generator from (seed, stream) alone,
// so serial and parallel runs see the same numbers.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

inline SplitMix64 make_stream(std::uint64_t seed, std::uint64_t stream) noexcept {
    return SplitMix64(stream_seed(seed, stream));
}

// `count` distinct values from [0, population), ascending (Floyd's algorithm).
std::vector<std::uint32_t> sample_without_replacement(SplitMix64& rng, std::size_t population,
                                                      std::size_t count);

} // namespace stripsviz
