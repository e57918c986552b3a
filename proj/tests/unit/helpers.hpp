#pragma once

// Fixtures and independent oracles shared by the unit tests.

#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "stripsviz/graph.hpp"
#include "stripsviz/pddl.hpp"
#include "stripsviz/rng.hpp"

namespace testing {

inline std::string data_path(const std::string& name) { return std::string(STRIPSVIZ_TEST_DATA) + "/" + name; }

inline stripsviz::LoadedInstance load_fixture(const std::string& problem,
                                              const stripsviz::GroundOptions& options = {}) {
    return stripsviz::load_instance(stripsviz::read_text_file(data_path("logistics-domain.pddl")),
                                    stripsviz::read_text_file(data_path(problem)), options);
}

// Nodes alternate kinds by parity so any edge (even, odd) is bipartite-legal.
inline stripsviz::TransitionGraph parity_graph(std::size_t n, const std::vector<std::pair<stripsviz::NodeId, stripsviz::NodeId>>& edges) {
    std::vector<stripsviz::Node> nodes;
    for (std::size_t i = 0; i < n; ++i) {
        nodes.push_back({(i % 2 ? "a" : "f") + std::to_string(i),
                         i % 2 ? stripsviz::NodeKind::action : stripsviz::NodeKind::fluent});
    }
    return stripsviz::TransitionGraph(std::move(nodes), edges);
}

// Random bipartite graph on n nodes with edge probability p between parities.
inline stripsviz::TransitionGraph random_bipartite(std::size_t n, double p, std::uint64_t seed) {
    stripsviz::SplitMix64 rng(seed);
    std::vector<std::pair<stripsviz::NodeId, stripsviz::NodeId>> edges;
    for (stripsviz::NodeId i = 0; i < n; ++i) {
        for (stripsviz::NodeId j = i + 1; j < n; ++j) {
            if ((i + j) % 2 == 1 && rng.uniform() < p) edges.emplace_back(i, j);
        }
    }
    return parity_graph(n, edges);
}

constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max();

// All-pairs hop counts by Floyd-Warshall.
inline std::vector<std::vector<std::uint32_t>> floyd_warshall(const stripsviz::TransitionGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::vector<std::uint32_t>> d(n, std::vector<std::uint32_t>(n, kInf));
    for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
    for (const auto& [a, b] : g.edges()) d[a][b] = d[b][a] = 1;
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (d[i][k] != kInf && d[k][j] != kInf && d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
    return d;
}

struct UnionFind {
    std::vector<std::size_t> parent;
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Component sizes, descending.
inline std::vector<std::size_t> component_sizes(const stripsviz::TransitionGraph& g) {
    UnionFind uf(g.node_count());
    for (const auto& [a, b] : g.edges()) uf.unite(a, b);
    std::vector<std::size_t> count(g.node_count(), 0);
    for (std::size_t i = 0; i < g.node_count(); ++i) ++count[uf.find(i)];
    std::vector<std::size_t> sizes;
    for (auto c : count)
        if (c) sizes.push_back(c);
    std::sort(sizes.rbegin(), sizes.rend());
    return sizes;
}

} // namespace testing
