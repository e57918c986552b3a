#include <doctest.h>

#include "helpers.hpp"
#include "oracle.hpp"
#include "stripsviz/embedder.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/generators.hpp"
#include "stripsviz/planner.hpp"

using namespace stripsviz;

namespace {

GroundedAction action(std::vector<Fluent> pre, std::vector<Fluent> add, std::vector<Fluent> del) {
    return {"a", "a", {}, std::move(pre), std::move(add), std::move(del)};
}

const std::vector<std::string> kTinyPlan{"load-truck_p0_t0_l1", "drive-truck_t0_l1_l2_c0", "unload-truck_p0_t0_l2"};

} // namespace

TEST_SUITE("planner") {

TEST_CASE("apply") {
    const auto s = make_state({"p"});
    CHECK(apply(s, action({}, {}, {})) == s);
    CHECK(apply(s, action({"p"}, {"q"}, {"p"})).true_fluents == std::vector<Fluent>{"q"});
    try {
        apply(s, action({"p", "r"}, {}, {}));
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.code() == "precondition_violation");
        CHECK(std::string(e.what()).find("r") != std::string::npos);
    }
}

TEST_CASE("goal already true gives the empty plan") {
    const auto l = testing::load_fixture("logistics-tiny.pddl");
    const auto r = plan(l.domain, make_state(l.problem.initial_state), std::vector<Fluent>{"at_p0_l1"});
    CHECK(r.status == PlanStatus::solved);
    CHECK(r.plan.actions.empty());
    CHECK(r.plan.cost == 0);
}

TEST_CASE("tiny Logistics blind plan") {
    const auto l = testing::load_fixture("logistics-tiny.pddl");
    const auto r = plan(l.domain, make_state(l.problem.initial_state), l.problem.goal);
    CHECK(r.plan.actions == kTinyPlan);
    CHECK(r.plan.cost == 3);
    CHECK(testing::dijkstra_oracle(l.domain, l.problem.initial_state, l.problem.goal).cost == 3);
}

TEST_CASE("embedding heuristic plans are valid and never cheaper than blind") {
    for (const char* fixture : {"logistics-tiny.pddl", "logistics-two-cities.pddl"}) {
        const auto l = testing::load_fixture(fixture);
        const auto g = build_graph(l.domain.actions, false);
        EmbedConfig cfg;
        cfg.dimension = 10;
        const FluentCoordinates coords(g, embed(g, cfg, 0));
        const auto s0 = make_state(l.problem.initial_state);
        const auto blind = plan(l.domain, s0, l.problem.goal);
        const auto greedy = plan(l.domain, s0, l.problem.goal, {}, &coords);
        REQUIRE(greedy.status == PlanStatus::solved);
        CHECK(validate(l.domain, s0, greedy.plan, l.problem.goal).valid);
        CHECK(greedy.plan.cost >= blind.plan.cost);
    }
}

TEST_CASE("blind cost equals the Dijkstra oracle on generated instances") {
    std::vector<GeneratedInstance> corpus;
    for (int c = 1; c <= 3; ++c) {
        LogisticsParams p;
        p.cities = c;
        p.locations_per_city = 2;
        p.airplanes = c - 1;
        p.packages = 1 + c % 2;
        corpus.push_back(generate_logistics(p, static_cast<std::uint64_t>(c)));
    }
    corpus.push_back(generate_barman({.cocktails = 1, .shots = 1, .ingredients = 2}, 0));
    for (const auto& gi : corpus) {
        CAPTURE(gi.name);
        const auto l = load_instance(gi.domain_pddl, gi.problem_pddl);
        const auto oracle = testing::dijkstra_oracle(l.domain, l.problem.initial_state, l.problem.goal);
        CHECK(oracle.states <= 10000);
        const auto s0 = make_state(l.problem.initial_state);
        const auto r = plan(l.domain, s0, l.problem.goal);
        REQUIRE(oracle.cost.has_value());
        CHECK(r.plan.cost == *oracle.cost);
        CHECK(validate(l.domain, s0, r.plan, l.problem.goal).valid);
    }
}

TEST_CASE("unsolvable and errors") {
    const auto l = testing::load_fixture("logistics-two-cities.pddl");
    const auto s0 = make_state(l.problem.initial_state);
    // Trucks cannot reach the other city: with the airplane's fluents removed the goal is unreachable.
    std::vector<Fluent> no_plane;
    for (const auto& f : s0.true_fluents)
        if (f != "at_a1_apt1") no_plane.push_back(f);
    const auto r = plan(l.domain, make_state(no_plane), std::vector<Fluent>{"at_p1_pos2"});
    CHECK(r.status == PlanStatus::unsolvable);
    CHECK(testing::dijkstra_oracle(l.domain, no_plane, {"at_p1_pos2"}).cost == std::nullopt);

    auto code = [&](auto&& f) {
        try {
            f();
        } catch (const Error& e) {
            return e.code();
        }
        return std::string("none");
    };
    CHECK(code([&] { plan(l.domain, s0, std::vector<Fluent>{"at_p1_nowhere"}); }) == "unknown_goal");
    CHECK(code([&] { plan(l.domain, make_state({"bogus"}), l.problem.goal); }) == "invalid_state");
    CHECK(code([&] { plan(l.domain, s0, l.problem.goal, {.node_budget = 3}); }) == "budget_exceeded");
}

TEST_CASE("validate") {
    const auto l = testing::load_fixture("logistics-tiny.pddl");
    const auto s0 = make_state(l.problem.initial_state);
    CHECK(validate(l.domain, s0, {}, std::vector<Fluent>{"at_p0_l1"}).valid);
    CHECK(validate(l.domain, s0, {kTinyPlan, 3}, l.problem.goal).valid);

    auto swapped = kTinyPlan;
    std::swap(swapped[0], swapped[1]);
    const auto bad = validate(l.domain, s0, {swapped, 3}, l.problem.goal);
    CHECK_FALSE(bad.valid);
    CHECK(bad.failing_step == 1u);
    CHECK(bad.reason == "precondition");
    CHECK(bad.missing == std::vector<Fluent>{"at_t0_l1"});

    const auto short_plan = validate(l.domain, s0, {{kTinyPlan[0]}, 1}, l.problem.goal);
    CHECK(short_plan.failing_step == 1u);
    CHECK(short_plan.reason == "goal");

    CHECK(validate(l.domain, s0, {{"fly_x"}, 1}, l.problem.goal).reason == "unknown_action");
}

TEST_CASE("IPC plan text round-trips") {
    const auto l = testing::load_fixture("logistics-tiny.pddl");
    const Plan p{kTinyPlan, 3};
    const auto text = to_ipc(p, l.domain);
    CHECK(text.find("(load-truck p0 t0 l1)") != std::string::npos);
    CHECK(text.find("; cost = 3 (unit cost)") != std::string::npos);
    CHECK(parse_plan(text, l.domain) == p);
    CHECK(parse_plan("load-truck_p0_t0_l1\n\n; note\n(DRIVE-TRUCK t0 l1 l2 c0)\n", l.domain).actions.size() == 2);
    CHECK_THROWS_AS(parse_plan("(fly a b)", l.domain), Error);
}

TEST_CASE("embedding distance") {
    const auto g = testing::parity_graph(3, {{0, 1}, {1, 2}});
    EmbeddingSet e;
    e.coords = {0, 0, 5, 5, 3, 4};
    const FluentCoordinates coords(g, e);
    CHECK(coords.size() == 2);
    const std::vector<Fluent> state{"f0"};
    CHECK(embedding_distance(coords, state, std::vector<Fluent>{"f2"}) == 5.0);
    CHECK(embedding_distance(coords, state, std::vector<Fluent>{"f0"}) == 0.0);
    CHECK(embedding_distance(coords, state, std::vector<Fluent>{"elsewhere"}) == 0.0);
}

TEST_CASE("JSON") {
    const auto j = to_json(Plan{kTinyPlan, 3});
    CHECK(j.at("schema") == "stripsviz/plan/v1");
    CHECK(j.at("cost") == 3);
    CHECK(to_json(make_state({"b", "a"})).at("true_fluents") == nlohmann::json::array({"a", "b"}));
}

}
