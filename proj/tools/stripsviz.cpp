// stripsviz: headless entry points for every pipeline stage.

#include <CLI11.hpp>

#include <charconv>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "stripsviz/embedder.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/generators.hpp"
#include "stripsviz/graph.hpp"
#include "stripsviz/overlay.hpp"
#include "stripsviz/pddl.hpp"
#include "stripsviz/planner.hpp"
#include "stripsviz/server.hpp"

namespace sv = stripsviz;

namespace {

struct InstanceArgs {
    std::string domain;
    std::string problem;
    std::size_t cap = sv::GroundOptions{}.max_actions;
    std::string pruning = "reachable";
    bool include_static = false;

    sv::GroundOptions options() const {
        sv::GroundOptions o;
        o.max_actions = cap;
        o.pruning = sv::parse_pruning(pruning);
        return o;
    }
    sv::LoadedInstance load() const {
        return sv::load_instance(sv::read_text_file(domain), sv::read_text_file(problem), options());
    }
};

void add_instance(CLI::App* cmd, InstanceArgs& a) {
    cmd->add_option("domain", a.domain, "Domain PDDL file")->required()->check(CLI::ExistingFile);
    cmd->add_option("problem", a.problem, "Problem PDDL file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--cap", a.cap, "Maximum number of grounded actions")->capture_default_str();
    cmd->add_option("--pruning", a.pruning, "none | static | reachable")->capture_default_str();
    cmd->add_flag("--include-static", a.include_static, "Keep static fluents in the graph");
}

struct EmbedArgs {
    sv::EmbedConfig cfg;
    std::string mode = "half-jump";
    int sample_size = 0;     // 0 = default
    double strength = 0.0;   // 0 = default
    bool no_rescale = false;
    std::uint64_t seed = 0;

    sv::EmbedConfig config() const {
        sv::EmbedConfig c = cfg;
        c.mode = sv::parse_embed_mode(mode);
        if (sample_size > 0) c.repulsion_sample_size = sample_size;
        if (strength > 0.0) c.repulsion_strength = strength;
        c.rescale = !no_rescale;
        c.validate();
        return c;
    }
};

void add_embed(CLI::App* cmd, EmbedArgs& a) {
    cmd->add_option("--seed", a.seed, "Random seed")->capture_default_str();
    cmd->add_option("--iterations", a.cfg.iterations, "Update iterations")->capture_default_str();
    cmd->add_option("--alpha", a.cfg.alpha, "Step bound")->capture_default_str();
    cmd->add_option("--dimension", a.cfg.dimension, "Embedding dimension")->capture_default_str();
    cmd->add_option("--mode", a.mode, "half-jump | force-attraction")->capture_default_str();
    cmd->add_option("--sample-size", a.sample_size, "Repellers per iteration (0 = ceil(ln n))")->capture_default_str();
    cmd->add_option("--strength", a.strength, "Repulsion strength (0 = n / sample size)")->capture_default_str();
    cmd->add_option("--init-low", a.cfg.init_low, "Lower bound of initial coordinates")->capture_default_str();
    cmd->add_option("--init-high", a.cfg.init_high, "Upper bound of initial coordinates")->capture_default_str();
    cmd->add_option("--epsilon", a.cfg.epsilon, "Distance floor in the repulsion")->capture_default_str();
    cmd->add_flag("--clamp-jump", a.cfg.clamp_jump, "Cap the whole half-jump step at alpha");
    cmd->add_flag("--no-rescale", a.no_rescale, "Skip the final rescale into the box");
    cmd->add_option("--box-low", a.cfg.box_low, "Display box lower bound")->capture_default_str();
    cmd->add_option("--box-high", a.cfg.box_high, "Display box upper bound")->capture_default_str();
    cmd->add_option("--threads", a.cfg.threads, "Worker threads (0 = all cores)")->capture_default_str();
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f || !(f << text)) throw sv::Error("io_error", "cannot write " + out);
}

void emit(const nlohmann::json& j, const std::string& out) { emit(j.dump(2) + "\n", out); }

sv::Plan read_plan(const std::string& path, const sv::GroundedDomain& domain) {
    return sv::parse_plan(sv::read_text_file(path), domain);
}

sv::HttpServer* g_server = nullptr;

void on_signal(int) {
    if (g_server) g_server->stop();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground, measure, embed and plan over STRIPS domains"};
    app.require_subcommand(1);
    std::string out;

    // gen
    auto* gen = app.add_subcommand("gen", "Write a generated domain/problem pair");
    std::string gen_class;
    std::string gen_dir = ".";
    std::uint64_t gen_seed = 0;
    sv::LogisticsParams lp;
    sv::BarmanParams bp;
    std::vector<std::string> routes;
    int missing_airport = -1;
    gen->add_option("class", gen_class, "logistics | barman")->required()->check(CLI::IsMember({"logistics", "barman"}));
    gen->add_option("--out-dir", gen_dir, "Directory for domain.pddl and problem.pddl")->capture_default_str();
    gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    gen->add_option("--cities", lp.cities)->capture_default_str();
    gen->add_option("--locations", lp.locations_per_city, "Locations per city")->capture_default_str();
    gen->add_option("--trucks", lp.trucks_per_city, "Trucks per city")->capture_default_str();
    gen->add_option("--airplanes", lp.airplanes)->capture_default_str();
    gen->add_option("--packages", lp.packages)->capture_default_str();
    gen->add_option("--route", routes, "Cities served by one airplane, e.g. 0,2 (repeat once per airplane)");
    gen->add_option("--missing-airport", missing_airport, "City whose airport fact is left out");
    gen->add_option("--cocktails", bp.cocktails)->capture_default_str();
    gen->add_option("--shots", bp.shots)->capture_default_str();
    gen->add_option("--ingredients", bp.ingredients)->capture_default_str();

    // ground / graph / metrics
    InstanceArgs inst;
    auto* ground = app.add_subcommand("ground", "Ground a domain and print its JSON export");
    add_instance(ground, inst);
    std::string problem_out;
    ground->add_option("--out,-o", out, "Output file (default stdout)");
    ground->add_option("--problem-out", problem_out, "Also write the canonical problem instance");

    auto* graph = app.add_subcommand("graph", "Print the transition graph");
    add_instance(graph, inst);
    graph->add_option("--out,-o", out, "Output file (default stdout)");

    auto* metrics = app.add_subcommand("metrics", "Print closeness, eccentricity, radius and components");
    add_instance(metrics, inst);
    int metric_threads = 1;
    metrics->add_option("--threads", metric_threads, "Worker threads (0 = all cores)")->capture_default_str();
    metrics->add_option("--out,-o", out, "Output file (default stdout)");

    // embed
    EmbedArgs emb;
    auto* embed = app.add_subcommand("embed", "Embed the transition graph");
    add_instance(embed, inst);
    add_embed(embed, emb);
    embed->add_option("--out,-o", out, "Output file (default stdout)");

    // plan
    auto* plan = app.add_subcommand("plan", "Plan from the initial state");
    add_instance(plan, inst);
    add_embed(plan, emb);
    std::vector<std::string> goals;
    std::string heuristic = "blind";
    std::string format = "json";
    std::string trace_out, overlay_out;
    std::size_t budget = sv::PlannerConfig{}.node_budget;
    int heuristic_dimension = 10;
    plan->add_option("--goal", goals, "Goal fluent (repeatable; default: the problem's goal)");
    plan->add_option("--heuristic", heuristic, "blind | embedding")->capture_default_str();
    plan->add_option("--budget", budget, "Node expansion budget")->capture_default_str();
    plan->add_option("--heuristic-dimension", heuristic_dimension, "Dimension of the heuristic embedding")
        ->capture_default_str();
    plan->add_option("--format", format, "json | ipc")->capture_default_str()->check(CLI::IsMember({"json", "ipc"}));
    plan->add_option("--trace-out", trace_out, "Write the plan trace JSON");
    plan->add_option("--overlay-out", overlay_out, "Write the overlay JSON (embeds with the given flags)");
    plan->add_option("--out,-o", out, "Output file (default stdout)");

    // validate
    auto* validate = app.add_subcommand("validate", "Replay a plan file and report the first failure");
    add_instance(validate, inst);
    std::string plan_file;
    validate->add_option("plan", plan_file, "Plan file (IPC lines or action ids)")->required()->check(CLI::ExistingFile);
    validate->add_option("--out,-o", out, "Output file (default stdout)");

    // trajectory
    auto* trajectory = app.add_subcommand("trajectory", "Values of a fluent family along a plan");
    add_instance(trajectory, inst);
    std::string family;
    trajectory->add_option("plan", plan_file, "Plan file")->required()->check(CLI::ExistingFile);
    trajectory->add_option("--family", family, "Regular expression matching the family's fluents")->required();
    trajectory->add_option("--out,-o", out, "Output file (default stdout)");

    // export-svg
    auto* svg = app.add_subcommand("export-svg", "Render the embedding, optionally with a plan overlay");
    add_instance(svg, inst);
    add_embed(svg, emb);
    sv::SvgOptions svg_opts;
    bool hide_actions = false;
    svg->add_option("--plan", plan_file, "Plan file to overlay")->check(CLI::ExistingFile);
    svg->add_option("--width", svg_opts.width)->capture_default_str();
    svg->add_option("--height", svg_opts.height)->capture_default_str();
    svg->add_flag("--labels", svg_opts.labels, "Draw node labels");
    svg->add_flag("--hide-actions", hide_actions, "Leave action nodes out");
    svg->add_option("--out,-o", out, "Output file (default stdout)");

    // serve
    sv::ServerConfig scfg;
    scfg.apply_env();
    auto* serve = app.add_subcommand("serve", "Run the HTTP/JSON session server");
    serve->add_option("--host", scfg.host)->capture_default_str();
    serve->add_option("--port", scfg.port, "0 picks a free port")->capture_default_str();
    serve->add_option("--cap", scfg.grounding.max_actions, "Grounding cap")->capture_default_str();
    serve->add_option("--budget", scfg.planner.node_budget, "Planner node budget")->capture_default_str();
    serve->add_option("--seed", scfg.seed, "Default embedding seed")->capture_default_str();
    serve->add_option("--iterations", scfg.embed.iterations, "Default embedding iterations")->capture_default_str();
    serve->add_option("--alpha", scfg.embed.alpha, "Default step bound")->capture_default_str();
    serve->add_option("--threads", scfg.embed.threads, "Embedding threads")->capture_default_str();
    serve->add_option("--frame-stride", scfg.frame_stride, "Iterations between streamed frames")->capture_default_str();
    serve->add_option("--heuristic-dimension", scfg.heuristic_dimension)->capture_default_str();
    serve->add_option("--snapshot-dir", scfg.snapshot_dir)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << sv::error_json(sv::Error("usage", e.what())).dump() << '\n';
        return 2;
    }

    try {
        if (*gen) {
            sv::GeneratedInstance g;
            if (gen_class == "logistics") {
                for (const auto& r : routes) {
                    std::vector<int> cities;
                    std::stringstream ss(r);
                    for (std::string item; std::getline(ss, item, ',');) {
                        int city = 0;
                        const auto [end, ec] = std::from_chars(item.data(), item.data() + item.size(), city);
                        if (ec != std::errc{} || end != item.data() + item.size()) {
                            throw sv::Error("invalid_argument", "--route expects comma-separated city indices, got '" + r + "'");
                        }
                        cities.push_back(city);
                    }
                    lp.routes.push_back(std::move(cities));
                }
                if (missing_airport >= 0) lp.missing_airport_city = missing_airport;
                g = sv::generate_logistics(lp, gen_seed);
            } else {
                g = sv::generate_barman(bp, gen_seed);
            }
            std::filesystem::create_directories(gen_dir);
            const auto dom = (std::filesystem::path(gen_dir) / "domain.pddl").string();
            const auto prob = (std::filesystem::path(gen_dir) / "problem.pddl").string();
            emit(g.domain_pddl, dom);
            emit(g.problem_pddl, prob);
            emit(nlohmann::json{{"schema", "stripsviz/generated/v1"}, {"name", g.name}, {"domain", dom}, {"problem", prob}},
                 "");
        } else if (*ground) {
            const auto l = inst.load();
            emit(sv::to_json(l.domain), out);
            if (!problem_out.empty()) emit(sv::to_json(l.problem), problem_out);
        } else if (*graph) {
            emit(sv::to_json(sv::build_graph(inst.load().domain.actions, inst.include_static)), out);
        } else if (*metrics) {
            const auto g = sv::build_graph(inst.load().domain.actions, inst.include_static);
            emit(sv::to_json(sv::graph_report(g, metric_threads), g), out);
        } else if (*embed) {
            const auto cfg = emb.config();
            const auto g = sv::build_graph(inst.load().domain.actions, inst.include_static);
            emit(sv::to_json(sv::embed(g, cfg, emb.seed), g, &cfg), out);
        } else if (*plan) {
            const auto l = inst.load();
            const auto s0 = sv::make_state(l.problem.initial_state);
            std::vector<sv::Fluent> goal = goals.empty() ? l.problem.goal : goals;
            std::sort(goal.begin(), goal.end());
            goal.erase(std::unique(goal.begin(), goal.end()), goal.end());
            sv::PlannerConfig pcfg;
            pcfg.node_budget = budget;
            const auto kind = sv::parse_heuristic(heuristic);
            std::optional<sv::TransitionGraph> g;
            auto graph_once = [&]() -> const sv::TransitionGraph& {
                if (!g) g = sv::build_graph(l.domain.actions, inst.include_static);
                return *g;
            };
            std::optional<sv::FluentCoordinates> coords;
            if (kind == sv::HeuristicKind::embedding) {
                auto hcfg = emb.config();
                hcfg.dimension = heuristic_dimension;
                coords.emplace(graph_once(), sv::embed(graph_once(), hcfg, emb.seed));
            }
            const auto result = sv::plan(l.domain, s0, goal, pcfg, coords ? &*coords : nullptr);
            if (result.status == sv::PlanStatus::unsolvable) {
                throw sv::Error("unsolvable", "no plan reaches the goal from the initial state");
            }
            if (format == "ipc") {
                emit(sv::to_ipc(result.plan, l.domain), out);
            } else {
                auto j = sv::to_json(result.plan);
                j["expanded"] = result.expanded;
                j["generated"] = result.generated;
                emit(j, out);
            }
            if (!trace_out.empty() || !overlay_out.empty()) {
                const auto trace = sv::trace_from_plan(l.domain, s0, result.plan);
                if (!trace_out.empty()) emit(sv::to_json(trace), trace_out);
                if (!overlay_out.empty()) {
                    const auto e = sv::embed(graph_once(), emb.config(), emb.seed);
                    emit(sv::to_json(sv::overlay_geometry(trace, graph_once(), e), graph_once(), e), overlay_out);
                }
            }
        } else if (*validate) {
            const auto l = inst.load();
            const auto report = sv::validate(l.domain, sv::make_state(l.problem.initial_state),
                                             read_plan(plan_file, l.domain), l.problem.goal);
            nlohmann::json j = {{"schema", "stripsviz/validation/v1"},
                                {"valid", report.valid},
                                {"reason", report.reason},
                                {"missing", report.missing},
                                {"description", report.describe()}};
            j["failing_step"] = report.failing_step ? nlohmann::json(*report.failing_step) : nlohmann::json();
            emit(j, out);
            return report.valid ? 0 : 3;
        } else if (*trajectory) {
            const auto l = inst.load();
            const auto trace = sv::trace_from_plan(l.domain, sv::make_state(l.problem.initial_state),
                                                   read_plan(plan_file, l.domain));
            nlohmann::json points = nlohmann::json::array();
            for (const auto& p : sv::fluent_trajectory(trace, sv::FluentFamily::from_regex(family))) {
                points.push_back({{"fluent", p.fluent}, {"state", p.state_index}});
            }
            emit(nlohmann::json{{"schema", "stripsviz/trajectory/v1"}, {"family", family}, {"points", points}}, out);
        } else if (*svg) {
            const auto l = inst.load();
            const auto g = sv::build_graph(l.domain.actions, inst.include_static);
            const auto e = sv::embed(g, emb.config(), emb.seed);
            svg_opts.show_actions = !hide_actions;
            const auto s0 = sv::make_state(l.problem.initial_state);
            if (plan_file.empty()) {
                emit(sv::render_svg(g, e, sv::node_classes(g, s0), nullptr, svg_opts), out);
            } else {
                const auto trace = sv::trace_from_plan(l.domain, s0, read_plan(plan_file, l.domain));
                const auto overlay = sv::overlay_geometry(trace, g, e);
                emit(sv::render_svg(g, e, overlay.node_classes, &overlay, svg_opts), out);
            }
        } else if (*serve) {
            sv::HttpServer server(scfg);
            const int port = server.bind();
            if (port < 0) {
                throw sv::Error("bind_failed", "cannot bind " + scfg.host + ":" + std::to_string(scfg.port));
            }
            g_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cout << nlohmann::json{{"schema", "stripsviz/listening/v1"}, {"host", scfg.host}, {"port", port}}.dump()
                      << std::endl;
            server.listen();
            g_server = nullptr;
        }
    } catch (const std::exception& ex) {
        std::cerr << sv::error_json(ex).dump() << '\n';
        return 1;
    }
    return 0;
}
