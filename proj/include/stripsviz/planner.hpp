#pragma once

// Forward state-space STRIPS search over a grounded domain.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "stripsviz/embedder.hpp"
#include "stripsviz/graph.hpp"
#include "stripsviz/pddl.hpp"

namespace stripsviz {

struct State {
    std::vector<Fluent> true_fluents; // sorted, closed world

    bool holds(std::string_view fluent) const;
    bool operator==(const State&) const = default;
};

State make_state(std::vector<Fluent> fluents);

// (s \ delete) ∪ add. Throws Error("precondition_violation") naming the missing fluents.
State apply(const State& s, const GroundedAction& a);

// Coordinates of embedded fluents, looked up by canonical name.
class FluentCoordinates {
public:
    FluentCoordinates() = default;
    FluentCoordinates(const TransitionGraph& g, const EmbeddingSet& e);

    const std::vector<double>* find(std::string_view fluent) const;
    std::size_t size() const noexcept { return points_.size(); }

private:
    std::unordered_map<std::string, std::vector<double>> points_;
};

// Sum over goal fluents g not in the state of the distance from g to the
// nearest embedded fluent that holds. Unembedded goals contribute 0.
double embedding_distance(const FluentCoordinates& coords, std::span<const Fluent> state,
                          std::span<const Fluent> goal);

enum class HeuristicKind { blind, embedding };

std::string_view to_string(HeuristicKind kind);
HeuristicKind parse_heuristic(std::string_view text);

struct PlannerConfig {
    std::size_t node_budget = 1'000'000; // expansions
};

struct Plan {
    std::vector<std::string> actions;
    int cost = 0; // unit action costs

    bool operator==(const Plan&) const = default;
};

enum class PlanStatus { solved, unsolvable };

struct PlanResult {
    PlanStatus status = PlanStatus::unsolvable;
    Plan plan;
    std::size_t expanded = 0;
    std::size_t generated = 0;
};

// Blind (coords == nullptr): breadth-first, cost-optimal. With coords: greedy
// best-first on embedding_distance. Ties: FIFO, successors in action-id order.
// Throws Error("budget_exceeded"), Error("unknown_goal"), Error("invalid_state").
PlanResult plan(const GroundedDomain& domain, const State& s0, std::span<const Fluent> goal,
                const PlannerConfig& cfg = {}, const FluentCoordinates* coords = nullptr);

struct ValidationReport {
    bool valid = true;
    std::optional<std::size_t> failing_step; // 0-based; == plan length when only the goal fails
    std::string reason;                      // "", "unknown_action", "precondition", "goal"
    std::vector<Fluent> missing;

    std::string describe() const;
};

ValidationReport validate(const GroundedDomain& domain, const State& s0, const Plan& plan,
                          std::span<const Fluent> goal);

// One "(name arg ...)" line per action, then "; cost = N (unit cost)".
std::string to_ipc(const Plan& plan, const GroundedDomain& domain);
// Accepts IPC lines or canonical action ids; ignores blank lines and ';' comments.
Plan parse_plan(std::string_view text, const GroundedDomain& domain);

nlohmann::json to_json(const Plan& plan);
nlohmann::json to_json(const State& state);

} // namespace stripsviz
