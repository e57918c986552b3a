#pragma once

// Plan traces drawn on top of an embedding: red segments from each action to
// the preconditions it consumes, black segments to the effects it produces.

#include <cstddef>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "stripsviz/embedder.hpp"
#include "stripsviz/graph.hpp"
#include "stripsviz/planner.hpp"

namespace stripsviz {

struct TraceStep {
    std::string action_id;
    std::vector<Fluent> consumed; // preconditions
    std::vector<Fluent> produced; // add effects
    std::vector<Fluent> deleted;

    bool operator==(const TraceStep&) const = default;
};

struct PlanTrace {
    std::vector<TraceStep> steps;
    std::vector<State> states; // steps.size() + 1

    bool operator==(const PlanTrace&) const = default;
};

// Throws Error("invalid_plan") carrying the validator's description.
PlanTrace trace_from_plan(const GroundedDomain& domain, const State& s0, const Plan& plan);

enum class SegmentKind { consumed, produced };
enum class NodeClass { current, action, other };

std::string_view to_string(SegmentKind kind);
std::string_view to_string(NodeClass cls);
std::string_view color_of(NodeClass cls);   // red / green / blue
std::string_view color_of(SegmentKind kind); // red / black

struct Segment {
    NodeId from; // the action
    NodeId to;   // the fluent
    SegmentKind kind;
    std::size_t step;

    bool operator==(const Segment&) const = default;
};

struct OverlayGeometry {
    std::vector<Segment> segments;       // by step; consumed then produced; fluents ascending
    std::vector<NodeClass> node_classes; // per graph node, from the trace's final state
    std::vector<Fluent> unplaced;        // referenced by the trace but not embedded

    bool operator==(const OverlayGeometry&) const = default;
};

OverlayGeometry overlay_geometry(const PlanTrace& trace, const TransitionGraph& g, const EmbeddingSet& e);

// Classes only (no plan): current state red, actions green, the rest blue.
std::vector<NodeClass> node_classes(const TransitionGraph& g, const State& current);

// A set of mutually exclusive fluents read as the values of one variable.
class FluentFamily {
public:
    static FluentFamily from_regex(const std::string& pattern);
    static FluentFamily from_prefixes(std::vector<std::string> prefixes);
    static FluentFamily from_list(std::vector<Fluent> members);

    bool contains(std::string_view fluent) const;

private:
    enum class Kind { regex, prefixes, list } kind_ = Kind::list;
    std::regex regex_;
    std::vector<std::string> items_;
};

struct TrajectoryPoint {
    Fluent fluent;
    std::size_t state_index; // first state of this run

    bool operator==(const TrajectoryPoint&) const = default;
};

// The family member true in each state, collapsed to change points. Throws
// Error("mutex_violation") naming the first state with 0 or >= 2 members.
std::vector<TrajectoryPoint> fluent_trajectory(const PlanTrace& trace, const FluentFamily& family);

nlohmann::json to_json(const PlanTrace& trace);
// {schema, segments:[{from, to, kind, step, from_xy, to_xy}], node_classes:{id: class}, unplaced}
nlohmann::json to_json(const OverlayGeometry& overlay, const TransitionGraph& g, const EmbeddingSet& e);

struct SvgOptions {
    double width = 800.0;
    double height = 800.0;
    double margin = 20.0;
    double node_radius = 2.5;
    bool show_actions = true;
    bool labels = false;
};

// Standalone SVG of the first two embedding axes plus an optional overlay.
std::string render_svg(const TransitionGraph& g, const EmbeddingSet& e, const std::vector<NodeClass>& classes,
                       const OverlayGeometry* overlay = nullptr, const SvgOptions& options = {});

} // namespace stripsviz
