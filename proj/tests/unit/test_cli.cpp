#include <doctest.h>

#include <httplib.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "helpers.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/generators.hpp"
#include "stripsviz/overlay.hpp"

extern char** environ;

using namespace stripsviz;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
    std::string err;
};

fs::path scratch() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("stripsviz-cli-" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Run cli(const std::string& args) {
    const auto err_file = scratch() / "stderr.txt";
    const std::string cmd = std::string(STRIPSVIZ_CLI) + " " + args + " 2>" + err_file.string();
    Run r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    char buf[4096];
    for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) r.out.append(buf, n);
    const int raw = ::pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.err = slurp(err_file);
    return r;
}

std::string instance(const char* problem) {
    return testing::data_path("logistics-domain.pddl") + " " + testing::data_path(problem);
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("ground, graph and metrics print the module exports") {
    const auto l = testing::load_fixture("logistics-two-cities.pddl");
    const auto g = build_graph(l.domain.actions, false);

    auto r = cli("ground " + instance("logistics-two-cities.pddl"));
    CHECK(r.status == 0);
    CHECK(r.out == to_json(l.domain).dump(2) + "\n");

    r = cli("graph " + instance("logistics-two-cities.pddl"));
    CHECK(r.out == to_json(g).dump(2) + "\n");

    r = cli("metrics " + instance("logistics-two-cities.pddl"));
    CHECK(r.out == to_json(graph_report(g), g).dump(2) + "\n");
}

TEST_CASE("embed is byte-identical per seed and matches the module") {
    const auto a = scratch() / "a.json";
    const auto b = scratch() / "b.json";
    const std::string args = "embed " + instance("logistics-two-cities.pddl") + " --seed 4 --iterations 50 --out ";
    REQUIRE(cli(args + a.string()).status == 0);
    REQUIRE(cli(args + b.string()).status == 0);
    CHECK(slurp(a) == slurp(b));

    const auto l = testing::load_fixture("logistics-two-cities.pddl");
    const auto g = build_graph(l.domain.actions, false);
    EmbedConfig cfg;
    cfg.iterations = 50;
    CHECK(slurp(a) == to_json(embed(g, cfg, 4), g, &cfg).dump(2) + "\n");
    CHECK(slurp(a) != cli("embed " + instance("logistics-two-cities.pddl") + " --seed 5 --iterations 50").out);
}

TEST_CASE("plan: goal already true, IPC output, validate") {
    auto r = cli("plan " + instance("logistics-tiny.pddl") + " --goal at_p0_l1");
    CHECK(r.status == 0);
    CHECK(json::parse(r.out).at("actions").empty());

    r = cli("plan " + instance("logistics-tiny.pddl") + " --format ipc");
    CHECK(r.status == 0);
    const auto plan_file = scratch() / "tiny.plan";
    std::ofstream(plan_file) << r.out;
    const auto l = testing::load_fixture("logistics-tiny.pddl");
    CHECK(parse_plan(r.out, l.domain).cost == 3);

    r = cli("validate " + instance("logistics-tiny.pddl") + " " + plan_file.string());
    CHECK(r.status == 0);
    CHECK(json::parse(r.out).at("valid") == true);

    std::ofstream(plan_file) << "(drive-truck t0 l1 l2 c0)\n(load-truck p0 t0 l1)\n";
    r = cli("validate " + instance("logistics-tiny.pddl") + " " + plan_file.string());
    CHECK(r.status == 3);
    CHECK(json::parse(r.out).at("failing_step") == 1);

    r = cli("trajectory " + instance("logistics-tiny.pddl") + " " + testing::data_path("logistics-tiny.plan") +
            " --family '(at|in)_p0_.*'");
    CHECK(r.status == 0);
    CHECK(json::parse(r.out).at("points").size() == 3);
}

TEST_CASE("plan overlay file matches the module overlay") {
    const auto overlay = scratch() / "overlay.json";
    auto r = cli("plan " + instance("logistics-tiny.pddl") + " --overlay-out " + overlay.string());
    REQUIRE(r.status == 0);
    const auto l = testing::load_fixture("logistics-tiny.pddl");
    const auto g = build_graph(l.domain.actions, false);
    const auto e = embed(g, EmbedConfig{}, 0);
    const auto s0 = make_state(l.problem.initial_state);
    const auto trace = trace_from_plan(l.domain, s0, plan(l.domain, s0, l.problem.goal).plan);
    CHECK(slurp(overlay) == to_json(overlay_geometry(trace, g, e), g, e).dump(2) + "\n");
}

TEST_CASE("gen writes the generator output") {
    const auto dir = scratch() / "gen";
    auto r = cli("gen logistics --cities 3 --packages 2 --seed 7 --out-dir " + dir.string());
    REQUIRE(r.status == 0);
    CHECK(json::parse(r.out).at("schema") == "stripsviz/generated/v1");
    LogisticsParams p;
    p.cities = 3;
    const auto gi = generate_logistics(p, 7);
    CHECK(slurp(dir / "domain.pddl") == gi.domain_pddl);
    CHECK(slurp(dir / "problem.pddl") == gi.problem_pddl);

    r = cli("gen barman --cocktails 2 --out-dir " + dir.string());
    CHECK(slurp(dir / "problem.pddl") == generate_barman({.cocktails = 2}, 0).problem_pddl);
}

TEST_CASE("errors are JSON on stderr with a nonzero exit") {
    const auto bad = scratch() / "bad.pddl";
    std::ofstream(bad) << "(define (domain d)\n  (:predicates (p)";
    auto r = cli("ground " + bad.string() + " " + testing::data_path("logistics-tiny.pddl"));
    CHECK(r.status != 0);
    CHECK(r.out.empty());
    const auto e = json::parse(r.err);
    CHECK(e.at("error").at("code") == "parse_error");
    CHECK(e.at("error").at("line") == 2);

    r = cli("plan " + instance("logistics-tiny.pddl") + " --cap 2");
    CHECK(json::parse(r.err).at("error").at("code") == "cap_exceeded");

    r = cli("plan " + instance("logistics-tiny.pddl") + " --goal at_p0_l1 --goal at_p0_l2");
    CHECK(r.status != 0);
    CHECK(json::parse(r.err).at("error").at("code") == "unsolvable");

    r = cli("metrics missing.pddl other.pddl");
    CHECK(r.status != 0);
    CHECK(json::parse(r.err).at("error").at("code") == "usage");
}

TEST_CASE("serve answers HTTP until interrupted") {
    int fds[2];
    REQUIRE(::pipe(fds) == 0);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    std::string bin = STRIPSVIZ_CLI;
    std::vector<std::string> args{bin, "serve", "--port", "0", "--iterations", "40"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = 0;
    REQUIRE(::posix_spawn(&pid, bin.c_str(), &actions, nullptr, argv.data(), environ) == 0);
    posix_spawn_file_actions_destroy(&actions);
    ::close(fds[1]);

    std::string line;
    for (char c; ::read(fds[0], &c, 1) == 1 && c != '\n';) line.push_back(c);
    ::close(fds[0]);
    const auto listening = json::parse(line);
    CHECK(listening.at("schema") == "stripsviz/listening/v1");

    httplib::Client client("127.0.0.1", listening.at("port").get<int>());
    const json body = {{"domain_path", testing::data_path("logistics-domain.pddl")},
                       {"problem_path", testing::data_path("logistics-tiny.pddl")}};
    auto r = client.Post("/sessions?wait=true", body.dump(), "application/json");
    REQUIRE(r);
    CHECK(r->status == 201);
    CHECK(json::parse(r->body).at("iterations") == 40);

    ::kill(pid, SIGINT);
    int status = 0;
    ::waitpid(pid, &status, 0);
    CHECK(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
}

}
