#include "stripsviz/graph.hpp"
#include "stripsviz/error.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stripsviz {

namespace {

constexpr std::uint32_t kUnreached = std::numeric_limits<std::uint32_t>::max();

// Fills `dist` with hop counts from src (kUnreached elsewhere) and returns the
// visit order.
std::vector<NodeId> bfs(const TransitionGraph& g, NodeId src, std::vector<std::uint32_t>& dist) {
    dist.assign(g.node_count(), kUnreached);
    std::vector<NodeId> order;
    order.reserve(g.node_count());
    dist[src] = 0;
    order.push_back(src);
    for (std::size_t head = 0; head < order.size(); ++head) {
        const NodeId u = order[head];
        for (NodeId v : g.neighbors(u)) {
            if (dist[v] == kUnreached) {
                dist[v] = dist[u] + 1;
                order.push_back(v);
            }
        }
    }
    return order;
}

void check_node(const TransitionGraph& g, NodeId id) {
    if (id >= g.node_count()) {
        throw Error("unknown_node", "node id " + std::to_string(id) + " is not in the graph");
    }
}

} // namespace

std::string_view to_string(NodeKind kind) {
    return kind == NodeKind::fluent ? "fluent" : "action";
}

TransitionGraph::TransitionGraph(std::vector<Node> nodes, std::span<const std::pair<NodeId, NodeId>> edges)
    : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    std::vector<std::pair<NodeId, NodeId>> directed;
    directed.reserve(edges.size() * 2);
    for (auto [a, b] : edges) {
        if (a >= n || b >= n) throw Error("invalid_graph", "edge endpoint out of range");
        if (a == b) throw Error("invalid_graph", "self-loop on '" + nodes_[a].label + "'");
        if (nodes_[a].kind == nodes_[b].kind) {
            throw Error("invalid_graph",
                        "edge '" + nodes_[a].label + "'-'" + nodes_[b].label + "' joins nodes of the same kind");
        }
        directed.emplace_back(a, b);
        directed.emplace_back(b, a);
    }
    std::sort(directed.begin(), directed.end());
    directed.erase(std::unique(directed.begin(), directed.end()), directed.end());
    edge_count_ = directed.size() / 2;
    offsets_.assign(n + 1, 0);
    for (auto [a, b] : directed) ++offsets_[a + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adjacency_.reserve(directed.size());
    for (auto [a, b] : directed) adjacency_.push_back(b);
}

std::span<const NodeId> TransitionGraph::neighbors(NodeId id) const {
    check_node(*this, id);
    return {adjacency_.data() + offsets_[id], adjacency_.data() + offsets_[id + 1]};
}

bool TransitionGraph::adjacent(NodeId a, NodeId b) const {
    auto nb = neighbors(a);
    return std::binary_search(nb.begin(), nb.end(), b);
}

std::optional<NodeId> TransitionGraph::find(std::string_view label, NodeKind kind) const {
    // Nodes built by build_graph are sorted within each kind; hand-built graphs need not be.
    for (NodeId i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].kind == kind && nodes_[i].label == label) return i;
    }
    return std::nullopt;
}

std::vector<std::pair<NodeId, NodeId>> TransitionGraph::edges() const {
    std::vector<std::pair<NodeId, NodeId>> out;
    out.reserve(edge_count_);
    for (NodeId u = 0; u < nodes_.size(); ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) out.emplace_back(u, v);
        }
    }
    return out;
}

TransitionGraph build_graph(std::span<const GroundedAction> actions, bool include_static) {
    std::vector<std::string> changing;
    for (const auto& a : actions) {
        changing.insert(changing.end(), a.add_effects.begin(), a.add_effects.end());
        changing.insert(changing.end(), a.delete_effects.begin(), a.delete_effects.end());
    }
    std::sort(changing.begin(), changing.end());
    changing.erase(std::unique(changing.begin(), changing.end()), changing.end());
    auto keep = [&](const Fluent& f) {
        return include_static || std::binary_search(changing.begin(), changing.end(), f);
    };

    std::vector<std::string> fluents;
    for (const auto& a : actions) {
        for (const auto* list : {&a.preconditions, &a.add_effects, &a.delete_effects}) {
            for (const auto& f : *list) {
                if (keep(f)) fluents.push_back(f);
            }
        }
    }
    std::sort(fluents.begin(), fluents.end());
    fluents.erase(std::unique(fluents.begin(), fluents.end()), fluents.end());

    std::vector<const GroundedAction*> sorted_actions;
    for (const auto& a : actions) sorted_actions.push_back(&a);
    std::sort(sorted_actions.begin(), sorted_actions.end(),
              [](const GroundedAction* x, const GroundedAction* y) { return x->id < y->id; });
    sorted_actions.erase(std::unique(sorted_actions.begin(), sorted_actions.end(),
                                     [](const GroundedAction* x, const GroundedAction* y) { return x->id == y->id; }),
                         sorted_actions.end());

    std::vector<Node> nodes;
    nodes.reserve(fluents.size() + sorted_actions.size());
    for (const auto& f : fluents) nodes.push_back({f, NodeKind::fluent});
    for (const auto* a : sorted_actions) nodes.push_back({a->id, NodeKind::action});

    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t k = 0; k < sorted_actions.size(); ++k) {
        const auto action_id = static_cast<NodeId>(fluents.size() + k);
        const GroundedAction& a = *sorted_actions[k];
        for (const auto* list : {&a.preconditions, &a.add_effects, &a.delete_effects}) {
            for (const auto& f : *list) {
                auto it = std::lower_bound(fluents.begin(), fluents.end(), f);
                if (it != fluents.end() && *it == f) {
                    edges.emplace_back(static_cast<NodeId>(it - fluents.begin()), action_id);
                }
            }
        }
    }
    return TransitionGraph(std::move(nodes), edges);
}

std::optional<std::uint32_t> hopcount(const TransitionGraph& g, NodeId src, NodeId dst) {
    check_node(g, src);
    check_node(g, dst);
    std::vector<std::uint32_t> dist;
    bfs(g, src, dist);
    if (dist[dst] == kUnreached) return std::nullopt;
    return dist[dst];
}

GraphReport graph_report(const TransitionGraph& g, int threads) {
    if (g.empty()) throw Error("empty_graph", "graph_report requires a nonempty graph");
    const std::size_t n = g.node_count();
    GraphReport report;
    report.closeness.assign(n, 0.0);
    report.eccentricity.assign(n, 0);
    std::vector<double> normalized(n, 0.0);

#ifdef _OPENMP
    const int workers = threads <= 0 ? omp_get_max_threads() : threads;
#pragma omp parallel num_threads(workers)
#else
    (void)threads;
#endif
    {
        std::vector<std::uint32_t> dist;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 16)
#endif
        for (std::int64_t s = 0; s < static_cast<std::int64_t>(n); ++s) {
            const auto order = bfs(g, static_cast<NodeId>(s), dist);
            std::uint64_t total = 0;
            std::uint32_t ecc = 0;
            for (NodeId v : order) {
                total += dist[v];
                ecc = std::max(ecc, dist[v]);
            }
            report.eccentricity[s] = ecc;
            if (total > 0) {
                report.closeness[s] = 1.0 / static_cast<double>(total);
                normalized[s] = static_cast<double>(order.size() - 1) / static_cast<double>(total);
            }
        }
    }

    double sum = 0.0;
    double sum_normalized = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += report.closeness[i];
        sum_normalized += normalized[i];
    }
    report.average_closeness = sum / static_cast<double>(n);
    report.average_normalized_closeness = sum_normalized / static_cast<double>(n);

    for (const auto& c : component_report(g)) report.components.push_back(c.nodes);
    const auto& largest = report.components.front();
    report.radius = kUnreached;
    for (NodeId v : largest) report.radius = std::min(report.radius, report.eccentricity[v]);
    return report;
}

std::vector<ComponentSummary> component_report(const TransitionGraph& g) {
    const std::size_t n = g.node_count();
    std::vector<std::uint32_t> label(n, kUnreached);
    std::vector<ComponentSummary> out;
    std::vector<std::uint32_t> dist;
    for (NodeId s = 0; s < n; ++s) {
        if (label[s] != kUnreached) continue;
        auto order = bfs(g, s, dist);
        for (NodeId v : order) label[v] = static_cast<std::uint32_t>(out.size());
        std::sort(order.begin(), order.end());
        out.push_back({std::move(order), {}});
    }
    std::stable_sort(out.begin(), out.end(), [](const ComponentSummary& a, const ComponentSummary& b) {
        return a.nodes.size() > b.nodes.size();
    });
    for (auto& c : out) {
        for (std::size_t i = 0; i < c.nodes.size() && i < 10; ++i) c.sample_labels.push_back(g.node(c.nodes[i]).label);
    }
    return out;
}

nlohmann::json to_json(const TransitionGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : g.nodes()) nodes.push_back({{"id", node.label}, {"kind", to_string(node.kind)}});
    nlohmann::json edges = nlohmann::json::array();
    for (auto [a, b] : g.edges()) edges.push_back({a, b});
    return {{"schema", "stripsviz/graph/v1"}, {"nodes", nodes}, {"edges", edges}};
}

nlohmann::json to_json(const GraphReport& report, const TransitionGraph& g) {
    nlohmann::json components = nlohmann::json::array();
    for (const auto& c : report.components) {
        nlohmann::json sample = nlohmann::json::array();
        for (std::size_t i = 0; i < c.size() && i < 10; ++i) sample.push_back(g.node(c[i]).label);
        components.push_back({{"size", c.size()}, {"sample", sample}});
    }
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId i = 0; i < g.node_count(); ++i) {
        nodes.push_back({{"id", g.node(i).label},
                         {"kind", to_string(g.node(i).kind)},
                         {"closeness", report.closeness[i]},
                         {"eccentricity", report.eccentricity[i]}});
    }
    return {{"schema", "stripsviz/metrics/v1"},
            {"node_count", g.node_count()},
            {"edge_count", g.edge_count()},
            {"average_closeness", report.average_closeness},
            {"average_normalized_closeness", report.average_normalized_closeness},
            {"radius", report.radius},
            {"components", components},
            {"nodes", nodes}};
}

} // namespace stripsviz
