#pragma once

// Session-holding HTTP/JSON service. SessionStore carries all of the logic
// and speaks JSON; HttpServer only routes requests and maps error codes to
// status lines.

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "stripsviz/embedder.hpp"
#include "stripsviz/graph.hpp"
#include "stripsviz/pddl.hpp"
#include "stripsviz/planner.hpp"

namespace httplib {
class Server;
}

namespace stripsviz {

struct ServerConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
    GroundOptions grounding;
    PlannerConfig planner;
    EmbedConfig embed;
    std::uint64_t seed = 0;
    int frame_stride = 25;         // iterations between streamed frames
    int heuristic_dimension = 10;  // dimension of the embedding behind the planner heuristic
    bool include_static = false;
    std::string snapshot_dir = ".";
    std::size_t max_sessions = 64;

    // STRIPSVIZ_HOST, STRIPSVIZ_PORT, STRIPSVIZ_GROUND_CAP, STRIPSVIZ_PLANNER_BUDGET,
    // STRIPSVIZ_EMBED_ITERATIONS, STRIPSVIZ_SEED, STRIPSVIZ_FRAME_STRIDE, STRIPSVIZ_SNAPSHOT_DIR.
    // `lookup` defaults to std::getenv.
    void apply_env(const std::function<const char*(const char*)>& lookup = {});
};

// Frames of one background embedding run. Subscribers read `frames` from any
// index and wait on `changed` for more.
struct EmbeddingJob {
    std::mutex mutex;
    std::condition_variable changed;
    std::vector<std::string> frames; // serialized frame JSON, iteration tags strictly increasing
    int iteration = 0;
    bool done = false;
    std::optional<EmbeddingSet> result; // rescaled final embedding
    std::optional<std::string> error;
    std::atomic<bool> cancel{false};
    std::thread worker;

    ~EmbeddingJob();
    void stop(); // cancel and join
    // Blocks until the run ends; throws Error("embedding_failed") if it failed.
    const EmbeddingSet& wait();
};

struct Session {
    std::string id;
    std::string domain_text;
    std::string problem_text;
    std::uint64_t seed = 0;
    EmbedConfig embed;
    bool include_static = false;
    GroundedDomain domain;
    ProblemInstance problem;
    TransitionGraph graph;
    GraphReport report;
    State initial_state;
    State current_state;
    std::vector<Plan> history;
    std::shared_ptr<EmbeddingJob> job;
    std::optional<FluentCoordinates> heuristic_coords; // built on first embedding-heuristic request

    std::mutex mutex; // serializes every operation on this session

    ~Session();
};

class SessionStore {
public:
    explicit SessionStore(ServerConfig cfg = {});
    ~SessionStore();

    SessionStore(const SessionStore&) = delete;
    SessionStore& operator=(const SessionStore&) = delete;

    const ServerConfig& config() const noexcept { return cfg_; }

    // Body: {domain | domain_path, problem | problem_path, seed?, embed?, grounding?, include_static?}.
    nlohmann::json create_session(const nlohmann::json& request, bool wait_for_embedding = false);
    nlohmann::json list_sessions() const;
    nlohmann::json session_info(const std::string& id) const;
    void delete_session(const std::string& id);

    nlohmann::json graph(const std::string& id) const;
    nlohmann::json grounded_domain(const std::string& id) const;
    nlohmann::json metrics(const std::string& id) const;
    // nullopt while the job is still running and wait is false.
    std::optional<nlohmann::json> embedding(const std::string& id, bool wait) const;
    nlohmann::json embedding_progress(const std::string& id) const;
    nlohmann::json state(const std::string& id) const;
    // Body: {goal: fluent | [fluents], heuristic?: "blind" | "embedding", commit?: bool, budget?: int}.
    nlohmann::json request_plan(const std::string& id, const nlohmann::json& request);
    nlohmann::json restart(const std::string& id);
    nlohmann::json snapshot(const std::string& id);
    std::string svg(const std::string& id) const;

    std::shared_ptr<EmbeddingJob> job(const std::string& id) const;

private:
    std::shared_ptr<Session> find(const std::string& id) const;
    std::string next_id();

    ServerConfig cfg_;
    mutable std::mutex mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::uint64_t counter_ = 0;
    std::uint64_t id_salt_ = 0;
};

// {schema, error:{code, message, line?, column?, feature?}}
nlohmann::json error_json(const std::exception& ex);
int http_status(const std::exception& ex);

class HttpServer {
public:
    explicit HttpServer(ServerConfig cfg);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    // Binds cfg.port (0 = any free port) and returns the bound port; -1 on failure.
    int bind();
    // Serves until stop(). Call after bind().
    void listen();
    // bind() + listen() on a background thread; returns the port.
    int start();
    void stop();

    SessionStore& store() noexcept { return store_; }

private:
    void routes();

    SessionStore store_;
    std::unique_ptr<httplib::Server> http_;
    std::thread thread_;
};

} // namespace stripsviz
