#pragma once

// Force-directed embedding of a transition graph.
//
// Every iteration reads a frozen copy of the previous coordinates (the base
// set) and writes fresh coordinates for all nodes at once, so per-node work is
// independent and may run in parallel with bit-identical results.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stripsviz/graph.hpp"

namespace stripsviz {

enum class EmbedMode {
    force_attraction, // pull toward each neighbor proportionally to distance
    half_jump,        // jump halfway to the neighbor centroid, then repel
};

std::string_view to_string(EmbedMode mode);
EmbedMode parse_embed_mode(std::string_view text);

struct EmbedConfig {
    int iterations = 1500;
    double alpha = 1.0; // max step length
    int dimension = 2;
    EmbedMode mode = EmbedMode::half_jump;
    std::optional<int> repulsion_sample_size;  // default ceil(ln |nodes|), at least 1
    std::optional<double> repulsion_strength;  // default |nodes| / sample size
    double init_low = 0.0;
    double init_high = 100.0;
    double epsilon = 1e-6; // distance floor in the repulsion magnitude
    bool clamp_jump = false; // half-jump: cap jump plus repulsion at alpha
    bool rescale = true;     // embed(): fit the result into [box_low, box_high]^d
    double box_low = 0.0;
    double box_high = 100.0;
    int threads = 1; // 0 = all cores

    void validate() const; // throws Error("invalid_config")
    std::size_t sample_size(std::size_t node_count) const;
    double strength(std::size_t node_count) const;
};

struct EmbeddingSet {
    int dimension = 2;
    std::uint64_t seed = 0;
    int iteration = 0;
    std::vector<double> coords; // row-major, node_count x dimension

    std::size_t size() const noexcept { return dimension > 0 ? coords.size() / static_cast<std::size_t>(dimension) : 0; }
    std::span<const double> point(std::size_t node) const {
        return {coords.data() + node * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
    }
    std::span<double> point(std::size_t node) {
        return {coords.data() + node * static_cast<std::size_t>(dimension), static_cast<std::size_t>(dimension)};
    }
    bool all_finite() const;

    bool operator==(const EmbeddingSet&) const = default;
};

EmbeddingSet init_embeddings(const TransitionGraph& g, const EmbedConfig& cfg, std::uint64_t seed);

// The repeller set drawn for iteration `iteration` (0-based) of run `seed`.
std::vector<NodeId> repulsion_set(std::size_t node_count, const EmbedConfig& cfg, std::uint64_t seed,
                                  int iteration);

struct UpdateStats {
    double max_step = 0.0;            // largest total displacement
    double max_bounded_step = 0.0;    // the part alpha bounds: whole step, or repulsion in half-jump
    double max_jump = 0.0;            // half-jump only
    bool finite = true;
};

// One iteration. `order` permutes the processing order (tests use this to
// show the result does not depend on it); empty means natural order.
EmbeddingSet update_embeddings(const EmbeddingSet& base, const TransitionGraph& g, const EmbedConfig& cfg,
                               UpdateStats* stats = nullptr, std::span<const NodeId> order = {});

using FrameCallback = std::function<void(const EmbeddingSet&)>;

// init + cfg.iterations updates; the callback sees every iterate (before the
// final rescale). Throws from the callback abort the run.
EmbeddingSet embed(const TransitionGraph& g, const EmbedConfig& cfg, std::uint64_t seed,
                   const FrameCallback& on_frame = {}, UpdateStats* stats = nullptr);

struct Box {
    std::vector<double> low;
    std::vector<double> high;

    static Box cube(int dimension, double low, double high);
};

// Uniform scale + translation: the bounding box fits `box` along the tightest
// axis and is centered along the others. All-coincident input maps to the center.
EmbeddingSet rescale(const EmbeddingSet& e, const Box& box);

// Mean over non-isolated nodes of |graph neighbors ∩ k nearest points| / min(k, degree).
double knn_preservation(const TransitionGraph& g, const EmbeddingSet& e, int k);

// Mean edge length divided by the mean distance of `samples` random
// non-adjacent pairs. Small values mean neighbors sit close together.
double separation_ratio(const TransitionGraph& g, const EmbeddingSet& e, std::size_t samples,
                        std::uint64_t seed);

nlohmann::json to_json(const EmbedConfig& cfg);
EmbedConfig embed_config_from_json(const nlohmann::json& j, EmbedConfig base = {});
// {schema, seed, iteration, config, nodes:[{id, kind, xy}]}
nlohmann::json to_json(const EmbeddingSet& e, const TransitionGraph& g, const EmbedConfig* cfg);
// Frame form: no config, tagged with the iteration and whether it is the last one.
nlohmann::json frame_json(const EmbeddingSet& e, const TransitionGraph& g, bool final_frame);

} // namespace stripsviz
