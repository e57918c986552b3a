#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "helpers.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/pddl.hpp"

using namespace stripsviz;

namespace {

const char* kTinyDomain = R"((define (domain tiny)
  (:requirements :strips :typing)
  (:types a b - object)
  (:predicates (p ?x - a) (q ?y - b) (r))
  (:action only-a :parameters (?x - a) :precondition (p ?x) :effect (and (r) (not (p ?x))))
  (:action nullary :parameters () :precondition (r) :effect (not (r)))))";

std::string problem_with(const std::string& objects, const std::string& init, const std::string& goal) {
    return "(define (problem t) (:domain tiny) (:objects " + objects + ") (:init " + init + ") (:goal " + goal + "))";
}

// Every binding of a schema's parameters allowed by the type hierarchy.
std::size_t brute_force_bindings(const DomainDescription& d, const ActionSchema& s,
                                 const std::vector<TypedName>& objects) {
    std::size_t total = 1;
    for (const auto& p : s.params) {
        total *= static_cast<std::size_t>(std::count_if(objects.begin(), objects.end(), [&](const TypedName& o) {
            return d.is_subtype(o.type, p.type);
        }));
    }
    return total;
}

std::string substitute(const Atom& atom, const ActionSchema& s, const std::vector<std::string>& args) {
    std::vector<std::string> bound;
    for (const auto& a : atom.args) {
        auto it = std::find_if(s.params.begin(), s.params.end(), [&](const TypedName& p) { return p.name == a; });
        bound.push_back(it == s.params.end() ? a : args[static_cast<std::size_t>(it - s.params.begin())]);
    }
    return canonical_name(atom.predicate, bound);
}

template <class F>
void check_error(F&& f, const std::string& code) {
    try {
        f();
        FAIL("expected error " << code);
    } catch (const Error& e) {
        CHECK(e.code() == code);
    }
}

} // namespace

TEST_SUITE("pddl") {

TEST_CASE("canonical names join with the separator") {
    const std::vector<std::string> args{"p0", "l33"};
    CHECK(canonical_name("at", args) == "at_p0_l33");
    CHECK(canonical_name("handempty", {}) == "handempty");
}

TEST_CASE("IPC Logistics domain has its six schemas") {
    const auto d = parse_domain(read_text_file(testing::data_path("logistics-domain.pddl")));
    CHECK(d.name == "logistics");
    std::set<std::string> names;
    for (const auto& s : d.schemas) names.insert(s.name);
    CHECK(names == std::set<std::string>{"load-truck", "unload-truck", "load-airplane", "unload-airplane",
                                         "drive-truck", "fly-airplane"});
    CHECK(d.predicates.size() == 3);
    CHECK(d.is_subtype("airport", "place"));
    CHECK(d.is_subtype("truck", "physobj"));
    CHECK_FALSE(d.is_subtype("place", "airport"));
}

TEST_CASE("one predicate and no actions") {
    const auto d = parse_domain("(define (domain d) (:requirements :strips) (:predicates (p)))");
    CHECK(d.schemas.empty());
    CHECK(d.predicates.size() == 1);
}

TEST_CASE("pretty printing round-trips") {
    const auto d = parse_domain(read_text_file(testing::data_path("logistics-domain.pddl")));
    CHECK(parse_domain(to_pddl(d)) == d);
    const auto p = parse_problem_description(read_text_file(testing::data_path("logistics-two-cities.pddl")));
    CHECK(parse_problem_description(to_pddl(p)) == p);
}

TEST_CASE("syntax errors carry line and column") {
    try {
        parse_domain("(define (domain d)\n  (:predicates (p)\n");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.code() == "parse_error");
        // The innermost paren left open.
        CHECK(e.line() == 2);
        CHECK(e.column() == 3);
    }
    try {
        parse_domain("(define (domain d))\n)");
        FAIL("no error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("features outside :strips + :typing are rejected") {
    auto feature_of = [](const std::string& text) {
        try {
            parse_domain(text);
        } catch (const UnsupportedError& e) {
            return e.feature();
        }
        return std::string("none");
    };
    CHECK(feature_of("(define (domain d) (:requirements :adl))") == ":adl");
    CHECK(feature_of("(define (domain d) (:requirements :strips) (:predicates (p) (q))"
                     "(:action a :parameters () :precondition (p) :effect (when (p) (q))))") == "conditional-effects");
    CHECK(feature_of("(define (domain d) (:requirements :strips) (:predicates (p))"
                     "(:action a :parameters () :precondition (not (p)) :effect (p)))") == "negative-preconditions");
    CHECK(feature_of("(define (domain d) (:requirements :strips) (:predicates (p ?x))"
                     "(:action a :parameters (?x ?y) :precondition (= ?x ?y) :effect (p ?x)))") == "equality");
    CHECK(feature_of("(define (domain d) (:requirements :strips) (:functions (f)))") == "numeric-fluents");
}

TEST_CASE("schema checks") {
    check_error([] { parse_domain("(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) "
                                  ":precondition (p ?y) :effect (p ?x)))"); },
                "parse_error");
    check_error([] { parse_domain("(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) "
                                  ":precondition (p ?x ?x) :effect (p ?x)))"); },
                "parse_error");
    check_error([] { parse_domain("(define (domain d) (:predicates (p)) (:action a :parameters () "
                                  ":precondition (p) :effect (and (p) (not (p)))))"); },
                "parse_error");
}

TEST_CASE("zero-parameter schema grounds once") {
    const auto d = parse_domain(kTinyDomain);
    const auto p = parse_problem_description(problem_with("", "(r)", "(r)"));
    const auto g = ground(d, p, {.pruning = Pruning::none});
    CHECK(g.find_action("nullary") != nullptr);
    CHECK(std::count_if(g.actions.begin(), g.actions.end(), [](const auto& a) { return a.schema == "nullary"; }) == 1);
}

TEST_CASE("incompatible objects give no groundings") {
    const auto d = parse_domain(kTinyDomain);
    const auto g = ground(d, parse_problem_description(problem_with("y1 y2 - b", "(r)", "(r)")),
                          {.pruning = Pruning::none});
    CHECK(std::none_of(g.actions.begin(), g.actions.end(), [](const auto& a) { return a.schema == "only-a"; }));
}

TEST_CASE("drive-truck on one city with two locations grounds 4 ways") {
    const auto l = testing::load_fixture("logistics-tiny.pddl", {.pruning = Pruning::none});
    const auto drives = std::count_if(l.domain.actions.begin(), l.domain.actions.end(),
                                      [](const auto& a) { return a.schema == "drive-truck"; });
    CHECK(drives == 4);
    // Reflexive drives keep their precondition; add wins over delete.
    const auto* self = l.domain.find_action("drive-truck_t0_l1_l1_c0");
    REQUIRE(self != nullptr);
    CHECK(self->add_effects == std::vector<Fluent>{"at_t0_l1"});
    CHECK(self->delete_effects.empty());
}

TEST_CASE("full grounding matches a brute-force binding count and substitution") {
    const auto d = parse_domain(read_text_file(testing::data_path("logistics-domain.pddl")));
    const auto p = parse_problem_description(read_text_file(testing::data_path("logistics-two-cities.pddl")));
    const auto g = ground(d, p, {.pruning = Pruning::none});
    std::map<std::string, std::size_t> count;
    for (const auto& a : g.actions) ++count[a.schema];
    for (const auto& s : d.schemas) {
        CAPTURE(s.name);
        CHECK(count[s.name] == brute_force_bindings(d, s, p.objects));
    }
    for (std::size_t i = 0; i < g.actions.size(); i += 7) {
        const auto& a = g.actions[i];
        const auto& s = *std::find_if(d.schemas.begin(), d.schemas.end(), [&](const auto& x) { return x.name == a.schema; });
        std::set<Fluent> pre, add, del;
        for (const auto& atom : s.preconditions) pre.insert(substitute(atom, s, a.args));
        for (const auto& atom : s.add_effects) add.insert(substitute(atom, s, a.args));
        for (const auto& atom : s.delete_effects) del.insert(substitute(atom, s, a.args));
        for (const auto& f : add) del.erase(f);
        CHECK(std::vector<Fluent>(pre.begin(), pre.end()) == a.preconditions);
        CHECK(std::vector<Fluent>(add.begin(), add.end()) == a.add_effects);
        CHECK(std::vector<Fluent>(del.begin(), del.end()) == a.delete_effects);
    }
}

TEST_CASE("reachable grounding is a subset of full grounding") {
    const auto full = testing::load_fixture("logistics-two-cities.pddl", {.pruning = Pruning::none});
    const auto reach = testing::load_fixture("logistics-two-cities.pddl");
    CHECK(reach.domain.actions.size() < full.domain.actions.size());
    for (const auto& a : reach.domain.actions) {
        const auto* f = full.domain.find_action(a.id);
        REQUIRE(f != nullptr);
        CHECK(*f == a);
    }
    // Trucks never leave their city.
    CHECK(reach.domain.find_action("drive-truck_t1_pos1_apt1_c1") != nullptr);
    CHECK(reach.domain.find_action("drive-truck_t1_pos1_apt2_c2") == nullptr);
}

TEST_CASE("static pruning keeps exactly the full groundings whose in-city facts hold initially") {
    const auto full = testing::load_fixture("logistics-two-cities.pddl", {.pruning = Pruning::none});
    const auto fixed = testing::load_fixture("logistics-two-cities.pddl", {.pruning = Pruning::static_facts});
    const auto reach = testing::load_fixture("logistics-two-cities.pddl");
    const std::set<Fluent> init(full.problem.initial_state.begin(), full.problem.initial_state.end());
    std::vector<std::string> expected;
    for (const auto& a : full.domain.actions) {
        // in-city is the only predicate no schema touches.
        const bool ok = std::all_of(a.preconditions.begin(), a.preconditions.end(), [&](const Fluent& f) {
            return f.rfind("in-city_", 0) != 0 || init.count(f);
        });
        if (ok) expected.push_back(a.id);
    }
    std::vector<std::string> got;
    for (const auto& a : fixed.domain.actions) got.push_back(a.id);
    CHECK(got == expected);
    CHECK(reach.domain.actions.size() < got.size());
    for (const auto& a : reach.domain.actions) CHECK(fixed.domain.find_action(a.id) != nullptr);

    CHECK(parse_pruning("static") == Pruning::static_facts);
    CHECK(to_string(Pruning::none) == "none");
    check_error([] { parse_pruning("some"); }, "invalid_argument");
}

TEST_CASE("static fluents are exactly those never added or deleted") {
    for (auto pruning : {Pruning::none, Pruning::reachable}) {
        const auto g = testing::load_fixture("logistics-two-cities.pddl", {.pruning = pruning}).domain;
        std::set<Fluent> touched, referenced;
        for (const auto& a : g.actions) {
            touched.insert(a.add_effects.begin(), a.add_effects.end());
            touched.insert(a.delete_effects.begin(), a.delete_effects.end());
            referenced.insert(a.preconditions.begin(), a.preconditions.end());
            referenced.insert(a.add_effects.begin(), a.add_effects.end());
            referenced.insert(a.delete_effects.begin(), a.delete_effects.end());
        }
        std::vector<Fluent> expected;
        for (const auto& v : g.fluents)
            if (!touched.count(v)) expected.push_back(v);
        CHECK(g.static_fluents == expected);
        for (const auto& f : referenced) CHECK(g.fluent_index(f).has_value());
        CHECK(g.is_static("in-city_apt1_c1"));
        CHECK(std::is_sorted(g.fluents.begin(), g.fluents.end()));
    }
}

TEST_CASE("grounding is deterministic") {
    const auto a = testing::load_fixture("logistics-two-cities.pddl");
    const auto b = testing::load_fixture("logistics-two-cities.pddl");
    CHECK(to_json(a.domain) == to_json(b.domain));
}

TEST_CASE("grounding cap") {
    check_error([] { testing::load_fixture("logistics-two-cities.pddl", {.max_actions = 5}); }, "cap_exceeded");
    check_error([] { testing::load_fixture("logistics-two-cities.pddl", {.max_actions = 5, .pruning = Pruning::none}); },
                "cap_exceeded");
}

TEST_CASE("object errors") {
    const auto d = parse_domain(kTinyDomain);
    check_error([&] { ground(d, parse_problem_description(problem_with("x1", "(r)", "(r)"))); }, "untyped_object");
    check_error([&] { ground(d, parse_problem_description(problem_with("x1 - c", "(r)", "(r)"))); }, "unknown_type");
    check_error([&] { ground(d, parse_problem_description(problem_with("x_1 - a", "(r)", "(r)"))); }, "parse_error");
}

TEST_CASE("problem instance canonicalization") {
    const auto l = testing::load_fixture("logistics-two-cities.pddl");
    // 9 :init atoms in the fixture file.
    CHECK(l.problem.initial_state.size() == 9);
    CHECK(l.problem.goal == std::vector<Fluent>{"at_p1_pos2", "at_p2_pos1"});

    const auto d = parse_domain(kTinyDomain);
    const auto g = ground(d, parse_problem_description(problem_with("x1 - a", "(p x1)", "(and)")));
    CHECK(parse_problem(problem_with("x1 - a", "(p x1)", "(and)"), g).goal.empty());
    check_error([&] { parse_problem(problem_with("x1 - a", "(p x1)", "(p x9)"), g); }, "unknown_object");
    check_error([&] { parse_problem(problem_with("x1 - a", "(p x1)", "(s x1)"), g); }, "unknown_predicate");
}

TEST_CASE("grounded JSON export") {
    const auto l = testing::load_fixture("logistics-tiny.pddl");
    const auto j = to_json(l.domain);
    CHECK(j.at("schema") == "stripsviz/grounded-domain/v1");
    CHECK(j.at("fluents").size() == l.domain.fluents.size());
    CHECK(j.at("actions").at(0).contains("pre"));
    CHECK(j.at("actions").at(0).contains("del"));
}

TEST_CASE("missing file") { check_error([] { read_text_file("/nonexistent/x.pddl"); }, "io_error"); }

}
