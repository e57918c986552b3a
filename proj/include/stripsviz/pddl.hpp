#pragma once

// STRIPS + typing PDDL front end: parsing, pretty-printing and grounding.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace stripsviz {

// Joins a predicate (or action) name with its arguments in canonical names:
// at_p0_l33, drive-truck_t0_l1_l2_c0. Never legal inside a PDDL name.
inline constexpr char kSeparator = '_';

using Fluent = std::string;

std::string canonical_name(std::string_view head, std::span<const std::string> args);

struct TypedName {
    std::string name;
    std::string type = "object";

    bool operator==(const TypedName&) const = default;
};

struct Atom {
    std::string predicate;
    std::vector<std::string> args; // variables start with '?'

    bool operator==(const Atom&) const = default;
};

struct PredicateDecl {
    std::string name;
    std::vector<TypedName> params;

    bool operator==(const PredicateDecl&) const = default;
};

struct ActionSchema {
    std::string name;
    std::vector<TypedName> params;
    std::vector<Atom> preconditions;
    std::vector<Atom> add_effects;
    std::vector<Atom> delete_effects;

    bool operator==(const ActionSchema&) const = default;
};

struct DomainDescription {
    std::string name;
    std::vector<std::string> requirements;
    std::vector<TypedName> types; // (type, parent)
    std::vector<TypedName> constants;
    std::vector<PredicateDecl> predicates;
    std::vector<ActionSchema> schemas;

    bool operator==(const DomainDescription&) const = default;

    const PredicateDecl* find_predicate(std::string_view name) const;
    // Reflexive; every type is a subtype of "object".
    bool is_subtype(std::string_view type, std::string_view ancestor) const;
    bool has_type(std::string_view type) const;
};

struct ProblemDescription {
    std::string name;
    std::string domain_name;
    std::vector<TypedName> objects;
    std::vector<Atom> init;
    std::vector<Atom> goal;

    bool operator==(const ProblemDescription&) const = default;
};

DomainDescription parse_domain(std::string_view text);
ProblemDescription parse_problem_description(std::string_view text);

std::string to_pddl(const DomainDescription& domain);
std::string to_pddl(const ProblemDescription& problem);

struct GroundedAction {
    std::string id;
    std::string schema;
    std::vector<std::string> args;
    // Sorted, duplicate-free; add_effects and delete_effects are disjoint.
    std::vector<Fluent> preconditions;
    std::vector<Fluent> add_effects;
    std::vector<Fluent> delete_effects;

    bool operator==(const GroundedAction&) const = default;
};

enum class Pruning {
    none,         // every type-consistent binding of every schema
    static_facts, // drop bindings whose static preconditions are false initially
    reachable,    // only bindings reachable from the initial state under delete relaxation
};

// "none" | "static" | "reachable"
Pruning parse_pruning(std::string_view text);
std::string_view to_string(Pruning pruning);

struct GroundOptions {
    std::size_t max_actions = 200'000;
    Pruning pruning = Pruning::reachable;
};

struct GroundedDomain {
    std::string name;
    std::vector<Fluent> fluents;         // V, sorted
    std::vector<GroundedAction> actions; // G_a, sorted by id
    std::vector<Fluent> static_fluents;  // sorted subset of V
    std::vector<TypedName> objects;      // constants and problem objects, sorted by name
    std::vector<PredicateDecl> predicates;

    std::optional<std::size_t> fluent_index(std::string_view fluent) const;
    std::optional<std::size_t> action_index(std::string_view id) const;
    const GroundedAction* find_action(std::string_view id) const;
    bool is_static(std::string_view fluent) const;
    bool has_object(std::string_view name) const;
};

GroundedDomain ground(const DomainDescription& domain, const ProblemDescription& problem,
                      const GroundOptions& options = {});

struct ProblemInstance {
    std::vector<Fluent> initial_state; // sorted
    std::vector<Fluent> goal;          // sorted

    bool operator==(const ProblemInstance&) const = default;
};

// Canonicalizes and checks init/goal against an already grounded domain.
ProblemInstance make_problem(const ProblemDescription& problem, const GroundedDomain& grounded);
ProblemInstance parse_problem(std::string_view text, const GroundedDomain& grounded);

struct LoadedInstance {
    GroundedDomain domain;
    ProblemInstance problem;
};

// parse_domain + parse_problem_description + ground + make_problem.
LoadedInstance load_instance(std::string_view domain_text, std::string_view problem_text,
                             const GroundOptions& options = {});

// {schema, name, fluents, static_fluents, objects, actions:[{id, pre, add, del}]}
nlohmann::json to_json(const GroundedDomain& grounded);
nlohmann::json to_json(const ProblemInstance& problem);

std::string read_text_file(const std::string& path);

} // namespace stripsviz
