#include "stripsviz/server.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/overlay.hpp"
#include "stripsviz/rng.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

namespace stripsviz {

namespace {

struct Cancelled {};

std::uint64_t parse_u64(const char* name, const char* text) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(text, &used);
        if (used != std::string(text).size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw Error("invalid_config", std::string(name) + " must be a non-negative integer, got '" + text + "'");
    }
}

std::string text_field(const nlohmann::json& req, const char* inline_key, const char* path_key) {
    if (req.contains(inline_key)) {
        if (!req.at(inline_key).is_string()) throw Error("bad_request", std::string(inline_key) + " must be a string");
        return req.at(inline_key).get<std::string>();
    }
    if (req.contains(path_key)) {
        if (!req.at(path_key).is_string()) throw Error("bad_request", std::string(path_key) + " must be a string");
        return read_text_file(req.at(path_key).get<std::string>());
    }
    throw Error("bad_request", std::string("request needs '") + inline_key + "' or '" + path_key + "'");
}

std::vector<Fluent> goal_list(const nlohmann::json& goal) {
    std::vector<Fluent> out;
    if (goal.is_string()) {
        out.push_back(goal.get<std::string>());
    } else if (goal.is_array()) {
        for (const auto& g : goal) {
            if (!g.is_string()) throw Error("bad_request", "goal entries must be fluent ids");
            out.push_back(g.get<std::string>());
        }
    } else {
        throw Error("bad_request", "goal must be a fluent id or a list of them");
    }
    if (out.empty()) throw Error("bad_request", "goal is empty");
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

State replay(const Session& s) {
    State st = s.initial_state;
    for (const auto& p : s.history) {
        for (const auto& id : p.actions) st = apply(st, *s.domain.find_action(id));
    }
    return st;
}

void check_history(const Session& s) {
    if (replay(s) != s.current_state) {
        throw Error("internal", "session " + s.id + ": current state differs from the replayed history");
    }
}

nlohmann::json state_json(const Session& s) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& p : s.history) history.push_back(p.actions);
    return {{"schema", "stripsviz/state/v1"}, {"true_fluents", s.current_state.true_fluents}, {"history", history}};
}

nlohmann::json info_json(const Session& s) {
    bool ready = false;
    int iteration = 0;
    {
        std::lock_guard lock(s.job->mutex);
        ready = s.job->done && s.job->result.has_value();
        iteration = s.job->iteration;
    }
    return {{"schema", "stripsviz/session/v1"},
            {"id", s.id},
            {"domain", s.domain.name},
            {"seed", s.seed},
            {"fluent_count", s.domain.fluents.size()},
            {"action_count", s.domain.actions.size()},
            {"node_count", s.graph.node_count()},
            {"edge_count", s.graph.edge_count()},
            {"embedding_ready", ready},
            {"embedding_iteration", iteration},
            {"iterations", s.embed.iterations}};
}

void start_job(EmbeddingJob* job, const TransitionGraph& graph, const EmbedConfig& cfg, std::uint64_t seed,
               int stride) {
    // Job and graph both belong to the session, whose destructor joins the worker.
    job->worker = std::thread([job, &graph, cfg, seed, stride] {
        const Box box = Box::cube(cfg.dimension, cfg.box_low, cfg.box_high);
        auto display = [&](const EmbeddingSet& e) { return cfg.rescale ? rescale(e, box) : e; };
        try {
            EmbeddingSet e = embed(graph, cfg, seed, [&](const EmbeddingSet& frame) {
                if (job->cancel.load()) throw Cancelled{};
                const bool emit = frame.iteration < cfg.iterations && frame.iteration % stride == 0;
                std::string text = emit ? frame_json(display(frame), graph, false).dump() : std::string{};
                std::lock_guard lock(job->mutex);
                job->iteration = frame.iteration;
                if (emit) job->frames.push_back(std::move(text));
                job->changed.notify_all();
            });
            std::string last = frame_json(e, graph, true).dump();
            std::lock_guard lock(job->mutex);
            job->frames.push_back(std::move(last));
            job->result = std::move(e);
            job->done = true;
        } catch (const Cancelled&) {
            std::lock_guard lock(job->mutex);
            job->error = "cancelled";
            job->done = true;
        } catch (const std::exception& ex) {
            std::lock_guard lock(job->mutex);
            job->error = ex.what();
            job->done = true;
        }
        job->changed.notify_all();
    });
}

int status_for(const std::string& code) {
    if (code == "unknown_session") return 404;
    if (code == "unsolvable" || code == "budget_exceeded") return 422;
    if (code == "internal" || code == "embedding_failed" || code == "io_error_snapshot") return 500;
    return 400;
}

} // namespace

void ServerConfig::apply_env(const std::function<const char*(const char*)>& lookup) {
    auto get = [&](const char* name) -> const char* { return lookup ? lookup(name) : std::getenv(name); };
    if (const char* v = get("STRIPSVIZ_HOST")) host = v;
    if (const char* v = get("STRIPSVIZ_PORT")) port = static_cast<int>(parse_u64("STRIPSVIZ_PORT", v));
    if (const char* v = get("STRIPSVIZ_GROUND_CAP")) grounding.max_actions = parse_u64("STRIPSVIZ_GROUND_CAP", v);
    if (const char* v = get("STRIPSVIZ_PLANNER_BUDGET")) planner.node_budget = parse_u64("STRIPSVIZ_PLANNER_BUDGET", v);
    if (const char* v = get("STRIPSVIZ_EMBED_ITERATIONS")) {
        embed.iterations = static_cast<int>(parse_u64("STRIPSVIZ_EMBED_ITERATIONS", v));
    }
    if (const char* v = get("STRIPSVIZ_SEED")) seed = parse_u64("STRIPSVIZ_SEED", v);
    if (const char* v = get("STRIPSVIZ_FRAME_STRIDE")) {
        frame_stride = static_cast<int>(parse_u64("STRIPSVIZ_FRAME_STRIDE", v));
    }
    if (const char* v = get("STRIPSVIZ_SNAPSHOT_DIR")) snapshot_dir = v;
}

EmbeddingJob::~EmbeddingJob() { stop(); }

void EmbeddingJob::stop() {
    cancel = true;
    if (worker.joinable() && worker.get_id() != std::this_thread::get_id()) worker.join();
}

Session::~Session() {
    if (job) job->stop();
}

const EmbeddingSet& EmbeddingJob::wait() {
    std::unique_lock lock(mutex);
    changed.wait(lock, [&] { return done; });
    if (!result) throw Error("embedding_failed", "embedding run failed: " + error.value_or("unknown"));
    return *result;
}

SessionStore::SessionStore(ServerConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.frame_stride < 1) throw Error("invalid_config", "frame_stride must be >= 1");
    if (cfg_.heuristic_dimension < 1) throw Error("invalid_config", "heuristic_dimension must be >= 1");
    cfg_.embed.validate();
    id_salt_ = std::random_device{}();
}

SessionStore::~SessionStore() {
    std::lock_guard lock(mutex_);
    for (auto& [id, s] : sessions_) s->job->cancel = true;
}

std::string SessionStore::next_id() {
    SplitMix64 rng(stream_seed(id_salt_, ++counter_));
    static constexpr char hex[] = "0123456789abcdef";
    std::string id = "s";
    for (std::uint64_t v = rng.next(), i = 0; i < 16; ++i, v >>= 4) id.push_back(hex[v & 15]);
    return id;
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error("unknown_session", "no session '" + id + "'");
    return it->second;
}

nlohmann::json SessionStore::create_session(const nlohmann::json& req, bool wait_for_embedding) {
    if (!req.is_object()) throw Error("bad_request", "request body must be a JSON object");
    auto s = std::make_shared<Session>();
    s->domain_text = text_field(req, "domain", "domain_path");
    s->problem_text = text_field(req, "problem", "problem_path");
    s->seed = cfg_.seed;
    s->embed = cfg_.embed;
    s->include_static = cfg_.include_static;
    GroundOptions grounding = cfg_.grounding;
    try {
        if (req.contains("seed")) s->seed = req.at("seed").get<std::uint64_t>();
        if (req.contains("include_static")) s->include_static = req.at("include_static").get<bool>();
        if (req.contains("grounding")) {
            const auto& gr = req.at("grounding");
            if (gr.contains("max_actions")) grounding.max_actions = gr.at("max_actions").get<std::size_t>();
            if (gr.contains("pruning")) grounding.pruning = parse_pruning(gr.at("pruning").get<std::string>());
        }
    } catch (const nlohmann::json::exception& ex) {
        throw Error("bad_request", std::string("bad session request: ") + ex.what());
    }
    if (req.contains("embed")) s->embed = embed_config_from_json(req.at("embed"), s->embed);

    auto loaded = load_instance(s->domain_text, s->problem_text, grounding);
    s->domain = std::move(loaded.domain);
    s->problem = std::move(loaded.problem);
    s->graph = build_graph(s->domain.actions, s->include_static);
    s->report = graph_report(s->graph, s->embed.threads);
    s->initial_state = make_state(s->problem.initial_state);
    s->current_state = s->initial_state;
    s->job = std::make_shared<EmbeddingJob>();

    {
        std::lock_guard lock(mutex_);
        if (sessions_.size() >= cfg_.max_sessions) {
            throw Error("too_many_sessions", "session limit " + std::to_string(cfg_.max_sessions) + " reached");
        }
        s->id = next_id();
        sessions_[s->id] = s;
    }
    start_job(s->job.get(), s->graph, s->embed, s->seed, cfg_.frame_stride);
    if (wait_for_embedding) s->job->wait();
    return info_json(*s);
}

nlohmann::json SessionStore::list_sessions() const {
    std::lock_guard lock(mutex_);
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& [id, s] : sessions_) ids.push_back(id);
    return {{"schema", "stripsviz/session-list/v1"}, {"sessions", ids}};
}

nlohmann::json SessionStore::session_info(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return info_json(*s);
}

void SessionStore::delete_session(const std::string& id) {
    std::shared_ptr<Session> s;
    {
        std::lock_guard lock(mutex_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) throw Error("unknown_session", "no session '" + id + "'");
        s = it->second;
        sessions_.erase(it);
    }
    s->job->cancel = true;
}

nlohmann::json SessionStore::graph(const std::string& id) const {
    return to_json(find(id)->graph);
}

nlohmann::json SessionStore::grounded_domain(const std::string& id) const {
    return to_json(find(id)->domain);
}

nlohmann::json SessionStore::metrics(const std::string& id) const {
    auto s = find(id);
    return to_json(s->report, s->graph);
}

std::optional<nlohmann::json> SessionStore::embedding(const std::string& id, bool wait) const {
    auto s = find(id);
    if (!wait) {
        std::lock_guard lock(s->job->mutex);
        if (!s->job->done) return std::nullopt;
    }
    return to_json(s->job->wait(), s->graph, &s->embed);
}

nlohmann::json SessionStore::embedding_progress(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->job->mutex);
    return {{"schema", "stripsviz/pending/v1"},
            {"iteration", s->job->iteration},
            {"iterations", s->embed.iterations}};
}

std::shared_ptr<EmbeddingJob> SessionStore::job(const std::string& id) const {
    return find(id)->job;
}

nlohmann::json SessionStore::state(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return state_json(*s);
}

nlohmann::json SessionStore::request_plan(const std::string& id, const nlohmann::json& req) {
    if (!req.is_object() || !req.contains("goal")) throw Error("bad_request", "plan request needs a goal");
    const auto goal = goal_list(req.at("goal"));
    HeuristicKind heuristic = HeuristicKind::blind;
    bool commit = true;
    PlannerConfig pcfg = cfg_.planner;
    try {
        if (req.contains("heuristic")) heuristic = parse_heuristic(req.at("heuristic").get<std::string>());
        if (req.contains("commit")) commit = req.at("commit").get<bool>();
        if (req.contains("budget")) pcfg.node_budget = req.at("budget").get<std::size_t>();
    } catch (const nlohmann::json::exception& ex) {
        throw Error("bad_request", std::string("bad plan request: ") + ex.what());
    }

    auto s = find(id);
    std::lock_guard lock(s->mutex);
    const EmbeddingSet& display = s->job->wait();
    const FluentCoordinates* coords = nullptr;
    if (heuristic == HeuristicKind::embedding) {
        if (!s->heuristic_coords) {
            EmbedConfig hcfg = s->embed;
            hcfg.dimension = cfg_.heuristic_dimension;
            s->heuristic_coords.emplace(s->graph, stripsviz::embed(s->graph, hcfg, s->seed));
        }
        coords = &*s->heuristic_coords;
    }

    const PlanResult result = plan(s->domain, s->current_state, goal, pcfg, coords);
    if (result.status == PlanStatus::unsolvable) {
        throw Error("unsolvable", "no plan reaches the goal from the current state");
    }
    const PlanTrace trace = trace_from_plan(s->domain, s->current_state, result.plan);
    const OverlayGeometry overlay = overlay_geometry(trace, s->graph, display);
    const bool advance = commit && !result.plan.actions.empty();
    if (advance) {
        const State before = s->current_state;
        s->current_state = trace.states.back();
        s->history.push_back(result.plan);
        try {
            check_history(*s);
        } catch (...) {
            s->current_state = before;
            s->history.pop_back();
            throw;
        }
    }
    return {{"schema", "stripsviz/plan-response/v1"},
            {"goal", goal},
            {"heuristic", to_string(heuristic)},
            {"committed", advance},
            {"expanded", result.expanded},
            {"generated", result.generated},
            {"plan", to_json(result.plan)},
            {"trace", to_json(trace)},
            {"overlay", to_json(overlay, s->graph, display)},
            {"state", state_json(*s)}};
}

nlohmann::json SessionStore::restart(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->current_state = s->initial_state;
    s->history.clear();
    check_history(*s);
    return state_json(*s);
}

nlohmann::json SessionStore::snapshot(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    nlohmann::json history = nlohmann::json::array();
    for (const auto& p : s->history) history.push_back(to_json(p));
    nlohmann::json snap = {{"schema", "stripsviz/snapshot/v1"},
                           {"id", s->id},
                           {"seed", s->seed},
                           {"include_static", s->include_static},
                           {"embed", to_json(s->embed)},
                           {"domain", s->domain_text},
                           {"problem", s->problem_text},
                           {"history", history},
                           {"state", state_json(*s)},
                           {"embedding", to_json(s->job->wait(), s->graph, &s->embed)}};
    const auto path = std::filesystem::path(cfg_.snapshot_dir) / (s->id + ".json");
    std::ofstream out(path);
    if (!out || !(out << snap.dump(2) << '\n')) {
        throw Error("io_error_snapshot", "cannot write snapshot " + path.string());
    }
    return {{"schema", "stripsviz/snapshot-ref/v1"}, {"id", s->id}, {"path", path.string()}};
}

std::string SessionStore::svg(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    return render_svg(s->graph, s->job->wait(), node_classes(s->graph, s->current_state));
}

nlohmann::json error_json(const std::exception& ex) {
    nlohmann::json err = {{"code", "internal"}, {"message", ex.what()}};
    if (const auto* e = dynamic_cast<const Error*>(&ex)) err["code"] = e->code();
    if (const auto* e = dynamic_cast<const ParseError*>(&ex)) {
        err["line"] = e->line();
        err["column"] = e->column();
    }
    if (const auto* e = dynamic_cast<const UnsupportedError*>(&ex)) err["feature"] = e->feature();
    return {{"schema", "stripsviz/error/v1"}, {"error", err}};
}

int http_status(const std::exception& ex) {
    if (const auto* e = dynamic_cast<const Error*>(&ex)) return status_for(e->code());
    return 500;
}

HttpServer::HttpServer(ServerConfig cfg) : store_(std::move(cfg)), http_(std::make_unique<httplib::Server>()) {
    routes();
}

HttpServer::~HttpServer() { stop(); }

namespace {

void send_json(httplib::Response& res, const nlohmann::json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

bool flag(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return false;
    const auto v = req.get_param_value(name);
    return v.empty() || v == "true" || v == "1";
}

nlohmann::json body_json(const httplib::Request& req) {
    if (req.body.empty()) return nlohmann::json::object();
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& ex) {
        throw Error("bad_request", std::string("request body is not JSON: ") + ex.what());
    }
}

// Frames already produced first, then live ones until the final frame.
void stream_frames(httplib::Response& res, std::shared_ptr<EmbeddingJob> job) {
    auto next = std::make_shared<std::size_t>(0);
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider("text/event-stream", [job, next](std::size_t, httplib::DataSink& sink) {
        std::vector<std::string> batch;
        bool finished = false;
        {
            std::unique_lock lock(job->mutex);
            job->changed.wait_for(lock, std::chrono::milliseconds(200),
                                  [&] { return job->frames.size() > *next || job->done; });
            for (; *next < job->frames.size(); ++*next) batch.push_back(job->frames[*next]);
            finished = job->done && *next == job->frames.size();
            if (finished && !job->result) {
                batch.push_back(nlohmann::json{{"schema", "stripsviz/error/v1"},
                                               {"error", {{"code", "embedding_failed"},
                                                          {"message", job->error.value_or("unknown")}}}}
                                    .dump());
            }
        }
        for (const auto& f : batch) {
            const std::string event = "event: frame\ndata: " + f + "\n\n";
            if (!sink.write(event.data(), event.size())) return false;
        }
        if (finished) sink.done();
        return sink.is_writable();
    });
}

} // namespace

void HttpServer::routes() {
    auto& http = *http_;
    auto& store = store_;
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& ex) {
            send_json(res, error_json(ex), http_status(ex));
        } catch (...) {
            send_json(res, error_json(std::runtime_error("unknown failure")), 500);
        }
    });
    http.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        send_json(res, error_json(Error("not_found", "no route for " + req.method + " " + req.path)), res.status);
    });

    http.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, {{"schema", "stripsviz/health/v1"}, {"status", "ok"}});
    });
    http.Get("/sessions", [&store](const httplib::Request&, httplib::Response& res) {
        send_json(res, store.list_sessions());
    });
    http.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.create_session(body_json(req), flag(req, "wait")), 201);
    });
    http.Get(R"(/sessions/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.session_info(req.matches[1]));
    });
    http.Delete(R"(/sessions/([^/]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        store.delete_session(req.matches[1]);
        res.status = 204;
    });
    http.Get(R"(/sessions/([^/]+)/graph)", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.graph(req.matches[1]));
    });
    http.Get(R"(/sessions/([^/]+)/domain)", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.grounded_domain(req.matches[1]));
    });
    http.Get(R"(/sessions/([^/]+)/metrics)", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.metrics(req.matches[1]));
    });
    http.Get(R"(/sessions/([^/]+)/embedding)", [&store](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        if (flag(req, "frames")) {
            stream_frames(res, store.job(id));
            return;
        }
        if (auto e = store.embedding(id, flag(req, "wait"))) {
            send_json(res, *e);
        } else {
            send_json(res, store.embedding_progress(id), 202);
        }
    });
    http.Get(R"(/sessions/([^/]+)/embedding/frames)", [&store](const httplib::Request& req, httplib::Response& res) {
        stream_frames(res, store.job(req.matches[1]));
    });
    http.Get(R"(/sessions/([^/]+)/state)", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.state(req.matches[1]));
    });
    http.Get(R"(/sessions/([^/]+)/svg)", [&store](const httplib::Request& req, httplib::Response& res) {
        res.set_content(store.svg(req.matches[1]), "image/svg+xml");
    });
    http.Post(R"(/sessions/([^/]+)/plan)", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.request_plan(req.matches[1], body_json(req)));
    });
    http.Post(R"(/sessions/([^/]+)/restart)", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.restart(req.matches[1]));
    });
    http.Post(R"(/sessions/([^/]+)/snapshot)", [&store](const httplib::Request& req, httplib::Response& res) {
        send_json(res, store.snapshot(req.matches[1]));
    });
}

int HttpServer::bind() {
    const auto& cfg = store_.config();
    if (cfg.port == 0) return http_->bind_to_any_port(cfg.host);
    return http_->bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
}

void HttpServer::listen() { http_->listen_after_bind(); }

int HttpServer::start() {
    const int port = bind();
    if (port < 0) {
        throw Error("bind_failed", "cannot bind " + store_.config().host + ":" + std::to_string(store_.config().port));
    }
    thread_ = std::thread([this] { listen(); });
    http_->wait_until_ready();
    return port;
}

void HttpServer::stop() {
    if (http_) http_->stop();
    if (thread_.joinable()) thread_.join();
}

} // namespace stripsviz
