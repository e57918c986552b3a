#include <doctest.h>

#include <algorithm>
#include <set>

#include "stripsviz/rng.hpp"

using namespace stripsviz;

TEST_SUITE("rng") {

TEST_CASE("SplitMix64 reference outputs for seed 1234567") {
    SplitMix64 rng(1234567);
    CHECK(rng.next() == 6457827717110365317ULL);
    CHECK(rng.next() == 3203168211198807973ULL);
    CHECK(rng.next() == 9817491932198370423ULL);
}

TEST_CASE("uniform and below stay in range") {
    SplitMix64 rng(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        CHECK((u >= 0.0 && u < 1.0));
        CHECK(rng.below(7) < 7);
    }
}

TEST_CASE("streams are independent of consumption order") {
    auto a = make_stream(42, 5);
    auto b = make_stream(42, 5);
    CHECK(a.next() == b.next());
    CHECK(stream_seed(42, 5) != stream_seed(42, 6));
    CHECK(stream_seed(42, 5) != stream_seed(43, 5));
}

TEST_CASE("sampling without replacement") {
    for (std::size_t count : {1u, 3u, 10u, 65u, 200u}) {
        SplitMix64 rng(count);
        const auto s = sample_without_replacement(rng, 200, count);
        CHECK(s.size() == count);
        CHECK(std::is_sorted(s.begin(), s.end()));
        CHECK(std::set<std::uint32_t>(s.begin(), s.end()).size() == count);
        CHECK(s.back() < 200);
    }
}

TEST_CASE("sampling is roughly uniform") {
    std::vector<int> hits(10, 0);
    SplitMix64 rng(9);
    for (int t = 0; t < 20000; ++t) {
        for (auto v : sample_without_replacement(rng, 10, 3)) ++hits[v];
    }
    // Each value is expected 6000 times.
    for (int h : hits) CHECK(std::abs(h - 6000) < 300);
}

}
