#include "stripsviz/generators.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/rng.hpp"

#include <set>
#include <sstream>

namespace stripsviz {

namespace {

constexpr const char* kLogisticsDomain = R"((define (domain logistics-routes)
  (:requirements :strips :typing)
  (:types truck airplane - vehicle
          package vehicle - physobj
          location city physobj - object)
  (:predicates (in-city ?l - location ?c - city)
               (at ?o - physobj ?l - location)
               (in ?p - package ?v - vehicle)
               (airport ?l - location)
               (serves ?a - airplane ?l - location))
  (:action load-truck
    :parameters (?p - package ?t - truck ?l - location)
    :precondition (and (at ?t ?l) (at ?p ?l))
    :effect (and (not (at ?p ?l)) (in ?p ?t)))
  (:action load-airplane
    :parameters (?p - package ?a - airplane ?l - location)
    :precondition (and (at ?a ?l) (at ?p ?l))
    :effect (and (not (at ?p ?l)) (in ?p ?a)))
  (:action unload-truck
    :parameters (?p - package ?t - truck ?l - location)
    :precondition (and (at ?t ?l) (in ?p ?t))
    :effect (and (not (in ?p ?t)) (at ?p ?l)))
  (:action unload-airplane
    :parameters (?p - package ?a - airplane ?l - location)
    :precondition (and (at ?a ?l) (in ?p ?a))
    :effect (and (not (in ?p ?a)) (at ?p ?l)))
  (:action drive-truck
    :parameters (?t - truck ?from ?to - location ?c - city)
    :precondition (and (at ?t ?from) (in-city ?from ?c) (in-city ?to ?c))
    :effect (and (not (at ?t ?from)) (at ?t ?to)))
  (:action fly-airplane
    :parameters (?a - airplane ?from ?to - location)
    :precondition (and (at ?a ?from) (airport ?from) (airport ?to) (serves ?a ?from) (serves ?a ?to))
    :effect (and (not (at ?a ?from)) (at ?a ?to)))
)
)";

constexpr const char* kBarmanDomain = R"((define (domain barman)
  (:requirements :strips :typing)
  (:types hand level beverage dispenser container - object
          ingredient cocktail - beverage
          shot shaker - container)
  (:predicates (ontable ?c - container)
               (holding ?h - hand ?c - container)
               (handempty ?h - hand)
               (empty ?c - container)
               (contains ?c - container ?b - beverage)
               (clean ?c - container)
               (used ?c - container ?b - beverage)
               (dispenses ?d - dispenser ?i - ingredient)
               (shaker-empty-level ?s - shaker ?l - level)
               (shaker-level ?s - shaker ?l - level)
               (next ?l1 ?l2 - level)
               (unshaked ?s - shaker)
               (shaked ?s - shaker)
               (cocktail-part1 ?c - cocktail ?i - ingredient)
               (cocktail-part2 ?c - cocktail ?i - ingredient))
  (:action grasp
    :parameters (?h - hand ?c - container)
    :precondition (and (ontable ?c) (handempty ?h))
    :effect (and (not (ontable ?c)) (not (handempty ?h)) (holding ?h ?c)))
  (:action leave
    :parameters (?h - hand ?c - container)
    :precondition (holding ?h ?c)
    :effect (and (not (holding ?h ?c)) (handempty ?h) (ontable ?c)))
  (:action fill-shot
    :parameters (?s - shot ?i - ingredient ?h1 ?h2 - hand ?d - dispenser)
    :precondition (and (holding ?h1 ?s) (handempty ?h2) (dispenses ?d ?i) (empty ?s) (clean ?s))
    :effect (and (not (empty ?s)) (contains ?s ?i) (not (clean ?s)) (used ?s ?i)))
  (:action refill-shot
    :parameters (?s - shot ?i - ingredient ?h1 ?h2 - hand ?d - dispenser)
    :precondition (and (holding ?h1 ?s) (handempty ?h2) (dispenses ?d ?i) (empty ?s) (used ?s ?i))
    :effect (and (not (empty ?s)) (contains ?s ?i)))
  (:action empty-shot
    :parameters (?h - hand ?p - shot ?b - beverage)
    :precondition (and (holding ?h ?p) (contains ?p ?b))
    :effect (and (not (contains ?p ?b)) (empty ?p)))
  (:action clean-shot
    :parameters (?s - shot ?b - beverage ?h1 ?h2 - hand)
    :precondition (and (holding ?h1 ?s) (handempty ?h2) (empty ?s) (used ?s ?b))
    :effect (and (clean ?s) (not (used ?s ?b))))
  (:action pour-shot-to-clean-shaker
    :parameters (?s - shot ?i - ingredient ?d - shaker ?h1 - hand ?l ?l1 - level)
    :precondition (and (holding ?h1 ?s) (contains ?s ?i) (empty ?d) (clean ?d) (shaker-level ?d ?l) (next ?l ?l1))
    :effect (and (not (contains ?s ?i)) (empty ?s) (contains ?d ?i) (not (empty ?d)) (not (clean ?d))
                 (unshaked ?d) (not (shaker-level ?d ?l)) (shaker-level ?d ?l1)))
  (:action pour-shot-to-used-shaker
    :parameters (?s - shot ?i - ingredient ?d - shaker ?h1 - hand ?l ?l1 - level)
    :precondition (and (holding ?h1 ?s) (contains ?s ?i) (unshaked ?d) (shaker-level ?d ?l) (next ?l ?l1))
    :effect (and (not (contains ?s ?i)) (contains ?d ?i) (empty ?s) (not (shaker-level ?d ?l))
                 (shaker-level ?d ?l1)))
  (:action empty-shaker
    :parameters (?h - hand ?s - shaker ?b - cocktail ?l ?l1 - level)
    :precondition (and (holding ?h ?s) (contains ?s ?b) (shaked ?s) (shaker-level ?s ?l) (shaker-empty-level ?s ?l1))
    :effect (and (not (shaked ?s)) (not (shaker-level ?s ?l)) (shaker-level ?s ?l1) (not (contains ?s ?b)) (empty ?s)))
  (:action clean-shaker
    :parameters (?h1 ?h2 - hand ?s - shaker)
    :precondition (and (holding ?h1 ?s) (handempty ?h2) (empty ?s))
    :effect (and (clean ?s)))
  (:action shake
    :parameters (?b - cocktail ?d1 ?d2 - ingredient ?s - shaker ?h1 ?h2 - hand)
    :precondition (and (holding ?h1 ?s) (handempty ?h2) (contains ?s ?d1) (contains ?s ?d2)
                       (cocktail-part1 ?b ?d1) (cocktail-part2 ?b ?d2) (unshaked ?s))
    :effect (and (not (unshaked ?s)) (not (contains ?s ?d1)) (not (contains ?s ?d2)) (shaked ?s) (contains ?s ?b)))
  (:action pour-shaker-to-shot
    :parameters (?b - beverage ?d - shot ?h - hand ?s - shaker ?l ?l1 - level)
    :precondition (and (holding ?h ?s) (shaked ?s) (empty ?d) (clean ?d) (contains ?s ?b) (shaker-level ?s ?l) (next ?l1 ?l))
    :effect (and (not (clean ?d)) (not (empty ?d)) (contains ?d ?b) (shaker-level ?s ?l1) (not (shaker-level ?s ?l))))
)
)";

void require(bool ok, const std::string& message) {
    if (!ok) throw Error("invalid_argument", message);
}

} // namespace

std::string logistics_location(int city, int index) {
    return "l" + std::to_string(city) + "-" + std::to_string(index);
}

std::string logistics_truck(int city, int index) {
    return "t" + std::to_string(city) + "-" + std::to_string(index);
}

std::vector<std::vector<int>> logistics_routes(const LogisticsParams& p) {
    if (!p.routes.empty()) return p.routes;
    std::vector<std::vector<int>> routes;
    for (int i = 0; i < p.airplanes; ++i) {
        const int from = i % p.cities;
        const int to = (from + 1 + i / p.cities) % p.cities;
        routes.push_back(from == to ? std::vector<int>{from} : std::vector<int>{from, to});
    }
    return routes;
}

GeneratedInstance generate_logistics(const LogisticsParams& p, std::uint64_t seed) {
    require(p.cities >= 1, "cities must be >= 1");
    require(p.locations_per_city >= 1, "locations_per_city must be >= 1");
    require(p.trucks_per_city >= 0, "trucks_per_city must be >= 0");
    require(p.airplanes >= 0, "airplanes must be >= 0");
    require(p.packages >= 0, "packages must be >= 0");
    const auto routes = logistics_routes(p);
    require(static_cast<int>(routes.size()) == p.airplanes, "routes must list one entry per airplane");
    for (const auto& r : routes) {
        require(!r.empty(), "every airplane needs at least one city");
        for (int c : r) require(c >= 0 && c < p.cities, "route city out of range");
    }

    std::ostringstream objects, init, goal;
    for (int c = 0; c < p.cities; ++c) objects << " c" << c;
    objects << " - city\n   ";
    for (int c = 0; c < p.cities; ++c) {
        for (int k = 0; k < p.locations_per_city; ++k) objects << ' ' << logistics_location(c, k);
    }
    objects << " - location\n   ";
    if (p.cities * p.trucks_per_city > 0) {
        for (int c = 0; c < p.cities; ++c) {
            for (int k = 0; k < p.trucks_per_city; ++k) objects << ' ' << logistics_truck(c, k);
        }
        objects << " - truck\n   ";
    }
    if (p.airplanes > 0) {
        for (int a = 0; a < p.airplanes; ++a) objects << " a" << a;
        objects << " - airplane\n   ";
    }
    if (p.packages > 0) {
        for (int k = 0; k < p.packages; ++k) objects << " p" << k;
        objects << " - package";
    }

    for (int c = 0; c < p.cities; ++c) {
        for (int k = 0; k < p.locations_per_city; ++k) {
            init << "    (in-city " << logistics_location(c, k) << " c" << c << ")\n";
        }
        if (p.missing_airport_city != c) init << "    (airport " << logistics_location(c, 0) << ")\n";
        for (int k = 0; k < p.trucks_per_city; ++k) {
            init << "    (at " << logistics_truck(c, k) << ' ' << logistics_location(c, k % p.locations_per_city) << ")\n";
        }
    }
    for (int a = 0; a < p.airplanes; ++a) {
        for (int c : std::set<int>(routes[a].begin(), routes[a].end())) {
            init << "    (serves a" << a << ' ' << logistics_location(c, 0) << ")\n";
        }
        init << "    (at a" << a << ' ' << logistics_location(routes[a].front(), 0) << ")\n";
    }
    SplitMix64 rng(seed);
    const auto total_locations = static_cast<std::uint64_t>(p.cities) * static_cast<std::uint64_t>(p.locations_per_city);
    for (int k = 0; k < p.packages; ++k) {
        const auto start = rng.below(total_locations);
        auto dest = rng.below(total_locations);
        if (total_locations > 1 && dest == start) dest = (dest + 1) % total_locations;
        const int sc = static_cast<int>(start) / p.locations_per_city;
        const int dc = static_cast<int>(dest) / p.locations_per_city;
        init << "    (at p" << k << ' ' << logistics_location(sc, static_cast<int>(start) % p.locations_per_city) << ")\n";
        goal << " (at p" << k << ' ' << logistics_location(dc, static_cast<int>(dest) % p.locations_per_city) << ')';
    }

    GeneratedInstance out;
    out.name = "logistics-c" + std::to_string(p.cities) + "-a" + std::to_string(p.airplanes) + "-p" +
               std::to_string(p.packages) + "-s" + std::to_string(seed);
    out.domain_pddl = kLogisticsDomain;
    std::ostringstream problem;
    problem << "(define (problem " << out.name << ")\n  (:domain logistics-routes)\n  (:objects"
            << objects.str() << ")\n  (:init\n" << init.str() << "  )\n  (:goal (and" << goal.str() << ")))\n";
    out.problem_pddl = problem.str();
    return out;
}

GeneratedInstance generate_barman(const BarmanParams& p, std::uint64_t seed) {
    require(p.cocktails >= 1, "cocktails must be >= 1");
    require(p.shots >= 1, "shots must be >= 1");
    require(p.ingredients >= 2, "ingredients must be >= 2");

    SplitMix64 rng(seed);
    std::ostringstream objects, init, goal;
    objects << " shaker1 - shaker\n    left right - hand\n   ";
    for (int s = 1; s <= p.shots; ++s) objects << " shot" << s;
    objects << " - shot\n   ";
    for (int i = 1; i <= p.ingredients; ++i) objects << " ingredient" << i;
    objects << " - ingredient\n   ";
    for (int c = 1; c <= p.cocktails; ++c) objects << " cocktail" << c;
    objects << " - cocktail\n   ";
    for (int i = 1; i <= p.ingredients; ++i) objects << " dispenser" << i;
    objects << " - dispenser\n    l0 l1 l2 - level";

    init << "    (ontable shaker1)\n";
    for (int s = 1; s <= p.shots; ++s) {
        init << "    (ontable shot" << s << ")\n    (clean shot" << s << ")\n    (empty shot" << s << ")\n";
    }
    for (int i = 1; i <= p.ingredients; ++i) init << "    (dispenses dispenser" << i << " ingredient" << i << ")\n";
    init << "    (clean shaker1)\n    (empty shaker1)\n    (handempty left)\n    (handempty right)\n"
         << "    (shaker-empty-level shaker1 l0)\n    (shaker-level shaker1 l0)\n    (next l0 l1)\n    (next l1 l2)\n";
    for (int c = 1; c <= p.cocktails; ++c) {
        const auto first = static_cast<int>(rng.below(static_cast<std::uint64_t>(p.ingredients)));
        const auto offset = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(p.ingredients - 1)));
        const int second = (first + offset) % p.ingredients;
        init << "    (cocktail-part1 cocktail" << c << " ingredient" << first + 1 << ")\n"
             << "    (cocktail-part2 cocktail" << c << " ingredient" << second + 1 << ")\n";
    }
    const int served = std::max(1, p.shots - 1);
    for (int s = 1; s <= served; ++s) goal << " (contains shot" << s << " cocktail" << ((s - 1) % p.cocktails) + 1 << ')';

    GeneratedInstance out;
    out.name = "barman-c" + std::to_string(p.cocktails) + "-s" + std::to_string(p.shots) + "-i" +
               std::to_string(p.ingredients) + "-s" + std::to_string(seed);
    out.domain_pddl = kBarmanDomain;
    std::ostringstream problem;
    problem << "(define (problem " << out.name << ")\n  (:domain barman)\n  (:objects\n   " << objects.str()
            << ")\n  (:init\n" << init.str() << "  )\n  (:goal (and" << goal.str() << ")))\n";
    out.problem_pddl = problem.str();
    return out;
}

} // namespace stripsviz
