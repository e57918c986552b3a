#pragma once

// Reproducible Logistics-class and Barman-class instances. The generated
// PDDL is plain :strips + :typing so any planner can read it.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace stripsviz {

struct GeneratedInstance {
    std::string name;
    std::string domain_pddl;
    std::string problem_pddl;
};

struct LogisticsParams {
    int cities = 4;
    int locations_per_city = 3; // location 0 of every city is its airport
    int trucks_per_city = 1;
    int airplanes = 3;
    int packages = 2;
    // Cities served by each airplane. Empty: airplane i links city i % C to
    // city (i % C + 1 + i / C) % C, so C - 1 airplanes make a chain and more
    // airplanes add longer hops.
    std::vector<std::vector<int>> routes;
    // Leave out the (airport ...) fact of this city, cutting it off from air travel.
    std::optional<int> missing_airport_city;
};

struct BarmanParams {
    int cocktails = 2;
    int shots = 3;
    int ingredients = 3;
};

// Object naming: city c<i>, location l<i>-<k>, truck t<i>-<k>, airplane a<i>, package p<i>.
std::string logistics_location(int city, int index);
std::string logistics_truck(int city, int index);
std::vector<std::vector<int>> logistics_routes(const LogisticsParams& params);

GeneratedInstance generate_logistics(const LogisticsParams& params, std::uint64_t seed);
GeneratedInstance generate_barman(const BarmanParams& params, std::uint64_t seed);

} // namespace stripsviz
