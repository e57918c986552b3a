#include "stripsviz/rng.hpp"

#include <algorithm>

namespace stripsviz {

namespace {

std::uint64_t mix(std::uint64_t x) noexcept {
    return SplitMix64(x).next();
}

} // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix(seed) ^ mix(stream + 1);
}

std::vector<std::uint32_t> sample_without_replacement(SplitMix64& rng, std::size_t population,
                                                      std::size_t count) {
    count = std::min(count, population);
    std::vector<std::uint32_t> picked;
    picked.reserve(count);
    std::vector<bool> taken(count > 64 ? population : 0, false);
    auto is_taken = [&](std::uint32_t v) {
        return taken.empty() ? std::find(picked.begin(), picked.end(), v) != picked.end() : bool(taken[v]);
    };
    // Floyd: for j in [population - count, population) pick t in [0, j]; take j if t is taken.
    for (std::size_t j = population - count; j < population; ++j) {
        auto t = static_cast<std::uint32_t>(rng.below(j + 1));
        if (is_taken(t)) t = static_cast<std::uint32_t>(j);
        picked.push_back(t);
        if (!taken.empty()) taken[t] = true;
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

} // namespace stripsviz
