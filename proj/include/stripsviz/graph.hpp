#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "stripsviz/pddl.hpp"

namespace stripsviz {

enum class NodeKind : std::uint8_t { fluent, action };

using NodeId = std::uint32_t;

struct Node {
    std::string label;
    NodeKind kind;

    bool operator==(const Node&) const = default;
};

std::string_view to_string(NodeKind kind);

// Undirected, simple, bipartite fluent/action graph. Immutable once built.
class TransitionGraph {
public:
    TransitionGraph() = default;

    // Duplicate edges are merged. Throws on self-loops, out-of-range ids and
    // edges joining two nodes of the same kind.
    TransitionGraph(std::vector<Node> nodes, std::span<const std::pair<NodeId, NodeId>> edges);

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edge_count_; }
    bool empty() const noexcept { return nodes_.empty(); }

    const std::vector<Node>& nodes() const noexcept { return nodes_; }
    const Node& node(NodeId id) const { return nodes_.at(id); }
    std::span<const NodeId> neighbors(NodeId id) const;
    std::size_t degree(NodeId id) const { return neighbors(id).size(); }
    bool adjacent(NodeId a, NodeId b) const;

    std::optional<NodeId> find(std::string_view label, NodeKind kind) const;
    std::optional<NodeId> find_fluent(std::string_view label) const { return find(label, NodeKind::fluent); }
    std::optional<NodeId> find_action(std::string_view label) const { return find(label, NodeKind::action); }

    // Each edge once as (smaller id, larger id), in ascending order.
    std::vector<std::pair<NodeId, NodeId>> edges() const;

private:
    std::vector<Node> nodes_;
    std::vector<std::size_t> offsets_; // CSR layout
    std::vector<NodeId> adjacency_;
    std::size_t edge_count_ = 0;
};

// Nodes: fluents (sorted) then actions (sorted). A fluent becomes a node when
// it touches at least one action; fluents never added or deleted by any of
// `actions` are left out unless include_static is set.
TransitionGraph build_graph(std::span<const GroundedAction> actions, bool include_static);

// Shortest path length in hops; nullopt when dst is unreachable from src.
std::optional<std::uint32_t> hopcount(const TransitionGraph& g, NodeId src, NodeId dst);

struct GraphReport {
    std::vector<double> closeness;          // 1 / sum of hops to reachable nodes, 0 for singletons
    double average_closeness = 0.0;
    // (reachable - 1) / sum of hops averaged over nodes; the reciprocal of the mean hop count.
    double average_normalized_closeness = 0.0;
    std::vector<std::uint32_t> eccentricity; // within the node's component
    std::uint32_t radius = 0;                // of the largest component
    std::vector<std::vector<NodeId>> components; // descending size, ids ascending within each
};

// One BFS per node, optionally spread over `threads` workers (0 = all cores).
GraphReport graph_report(const TransitionGraph& g, int threads = 1);

struct ComponentSummary {
    std::vector<NodeId> nodes;
    std::vector<std::string> sample_labels; // at most 10
};

std::vector<ComponentSummary> component_report(const TransitionGraph& g);

// {schema, nodes:[{id, kind}], edges:[[i, j]]}
nlohmann::json to_json(const TransitionGraph& g);
nlohmann::json to_json(const GraphReport& report, const TransitionGraph& g);

} // namespace stripsviz
