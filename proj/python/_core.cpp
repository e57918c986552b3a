#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "stripsviz/embedder.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/generators.hpp"
#include "stripsviz/graph.hpp"
#include "stripsviz/overlay.hpp"
#include "stripsviz/planner.hpp"
#include "stripsviz/server.hpp"

namespace py = pybind11;
namespace sv = stripsviz;
using nlohmann::json;

namespace {

// Results cross the boundary as JSON text; the Python side decodes it.

sv::GroundOptions ground_options(std::size_t max_actions, const std::string& pruning) {
    sv::GroundOptions o;
    o.max_actions = max_actions;
    o.pruning = sv::parse_pruning(pruning);
    return o;
}

struct Instance {
    sv::LoadedInstance loaded;
    sv::TransitionGraph graph;
};

Instance load(const std::string& domain, const std::string& problem, const json& opts) {
    const auto g = ground_options(opts.value("max_actions", sv::GroundOptions{}.max_actions),
                                  opts.value("pruning", std::string("reachable")));
    Instance i{sv::load_instance(domain, problem, g), {}};
    i.graph = sv::build_graph(i.loaded.domain.actions, opts.value("include_static", false));
    return i;
}

std::string ground(const std::string& domain, const std::string& problem, const std::string& opts) {
    py::gil_scoped_release release;
    const auto i = load(domain, problem, json::parse(opts));
    return json{{"domain", sv::to_json(i.loaded.domain)}, {"problem", sv::to_json(i.loaded.problem)}}.dump();
}

std::string graph(const std::string& domain, const std::string& problem, const std::string& opts) {
    py::gil_scoped_release release;
    return sv::to_json(load(domain, problem, json::parse(opts)).graph).dump();
}

std::string metrics(const std::string& domain, const std::string& problem, const std::string& opts, int threads) {
    py::gil_scoped_release release;
    const auto i = load(domain, problem, json::parse(opts));
    return sv::to_json(sv::graph_report(i.graph, threads), i.graph).dump();
}

std::string embed(const std::string& domain, const std::string& problem, const std::string& opts,
                  std::uint64_t seed, const std::string& config) {
    py::gil_scoped_release release;
    const auto i = load(domain, problem, json::parse(opts));
    const auto cfg = sv::embed_config_from_json(json::parse(config));
    return sv::to_json(sv::embed(i.graph, cfg, seed), i.graph, &cfg).dump();
}

std::string plan(const std::string& domain, const std::string& problem, const std::string& opts,
                 std::vector<std::string> goal, const std::string& heuristic, std::size_t budget,
                 std::uint64_t seed, int heuristic_dimension) {
    py::gil_scoped_release release;
    const auto i = load(domain, problem, json::parse(opts));
    const auto& d = i.loaded.domain;
    const auto s0 = sv::make_state(i.loaded.problem.initial_state);
    if (goal.empty()) goal = i.loaded.problem.goal;
    std::sort(goal.begin(), goal.end());
    goal.erase(std::unique(goal.begin(), goal.end()), goal.end());
    std::optional<sv::FluentCoordinates> coords;
    if (sv::parse_heuristic(heuristic) == sv::HeuristicKind::embedding) {
        sv::EmbedConfig hcfg;
        hcfg.dimension = heuristic_dimension;
        coords.emplace(i.graph, sv::embed(i.graph, hcfg, seed));
    }
    sv::PlannerConfig pcfg;
    pcfg.node_budget = budget;
    const auto r = sv::plan(d, s0, goal, pcfg, coords ? &*coords : nullptr);
    if (r.status == sv::PlanStatus::unsolvable) throw sv::Error("unsolvable", "no plan reaches the goal");
    const auto trace = sv::trace_from_plan(d, s0, r.plan);
    auto j = sv::to_json(r.plan);
    j["expanded"] = r.expanded;
    j["generated"] = r.generated;
    return json{{"plan", j}, {"trace", sv::to_json(trace)}, {"ipc", sv::to_ipc(r.plan, d)}}.dump();
}

std::string validate(const std::string& domain, const std::string& problem, const std::string& plan_text) {
    py::gil_scoped_release release;
    const auto l = sv::load_instance(domain, problem);
    const auto rep = sv::validate(l.domain, sv::make_state(l.problem.initial_state),
                                  sv::parse_plan(plan_text, l.domain), l.problem.goal);
    json j = {{"schema", "stripsviz/validation/v1"},
              {"valid", rep.valid},
              {"reason", rep.reason},
              {"missing", rep.missing},
              {"description", rep.describe()}};
    j["failing_step"] = rep.failing_step ? json(*rep.failing_step) : json();
    return j.dump();
}

std::string generated_json(const sv::GeneratedInstance& g) {
    return json{{"name", g.name}, {"domain", g.domain_pddl}, {"problem", g.problem_pddl}}.dump();
}

std::string generate_logistics(const std::string& params, std::uint64_t seed) {
    const auto j = json::parse(params);
    sv::LogisticsParams p;
    p.cities = j.value("cities", p.cities);
    p.locations_per_city = j.value("locations_per_city", p.locations_per_city);
    p.trucks_per_city = j.value("trucks_per_city", p.trucks_per_city);
    p.airplanes = j.value("airplanes", p.airplanes);
    p.packages = j.value("packages", p.packages);
    if (j.contains("routes")) p.routes = j.at("routes").get<std::vector<std::vector<int>>>();
    if (j.contains("missing_airport_city")) p.missing_airport_city = j.at("missing_airport_city").get<int>();
    return generated_json(sv::generate_logistics(p, seed));
}

std::string generate_barman(const std::string& params, std::uint64_t seed) {
    const auto j = json::parse(params);
    sv::BarmanParams p;
    p.cocktails = j.value("cocktails", p.cocktails);
    p.shots = j.value("shots", p.shots);
    p.ingredients = j.value("ingredients", p.ingredients);
    return generated_json(sv::generate_barman(p, seed));
}

class Server {
public:
    explicit Server(const std::string& config) {
        const auto j = json::parse(config);
        sv::ServerConfig cfg;
        cfg.apply_env();
        cfg.host = j.value("host", cfg.host);
        cfg.port = j.value("port", 0);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.frame_stride = j.value("frame_stride", cfg.frame_stride);
        cfg.snapshot_dir = j.value("snapshot_dir", cfg.snapshot_dir);
        cfg.planner.node_budget = j.value("node_budget", cfg.planner.node_budget);
        cfg.grounding.max_actions = j.value("max_actions", cfg.grounding.max_actions);
        if (j.contains("embed")) cfg.embed = sv::embed_config_from_json(j.at("embed"), cfg.embed);
        server_ = std::make_unique<sv::HttpServer>(cfg);
        port_ = server_->start();
    }
    int port() const { return port_; }
    void stop() {
        py::gil_scoped_release release;
        if (server_) server_->stop();
        server_.reset();
    }

private:
    std::unique_ptr<sv::HttpServer> server_;
    int port_ = -1;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "stripsviz native core";

    PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
    error.call_once_and_store_result([&] { return py::exception<sv::Error>(m, "StripsVizError"); });
    // The message is the error JSON, so Python sees the same payload as HTTP clients.
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const sv::Error& e) {
            py::set_error(error.get_stored(), sv::error_json(e).dump().c_str());
        } catch (const json::exception& e) {
            py::set_error(error.get_stored(), sv::error_json(sv::Error("bad_request", e.what())).dump().c_str());
        }
    });

    m.def("ground", &ground, py::arg("domain"), py::arg("problem"), py::arg("options") = "{}");
    m.def("graph", &graph, py::arg("domain"), py::arg("problem"), py::arg("options") = "{}");
    m.def("metrics", &metrics, py::arg("domain"), py::arg("problem"), py::arg("options") = "{}",
          py::arg("threads") = 1);
    m.def("embed", &embed, py::arg("domain"), py::arg("problem"), py::arg("options") = "{}", py::arg("seed") = 0,
          py::arg("config") = "{}");
    m.def("plan", &plan, py::arg("domain"), py::arg("problem"), py::arg("options") = "{}",
          py::arg("goal") = std::vector<std::string>{}, py::arg("heuristic") = "blind",
          py::arg("budget") = sv::PlannerConfig{}.node_budget, py::arg("seed") = 0,
          py::arg("heuristic_dimension") = 10);
    m.def("validate", &validate, py::arg("domain"), py::arg("problem"), py::arg("plan_text"));
    m.def("generate_logistics", &generate_logistics, py::arg("params") = "{}", py::arg("seed") = 0);
    m.def("generate_barman", &generate_barman, py::arg("params") = "{}", py::arg("seed") = 0);

    py::class_<Server>(m, "Server")
        .def(py::init<const std::string&>(), py::arg("config") = "{}")
        .def_property_readonly("port", &Server::port)
        .def("stop", &Server::stop);
}
