#include "stripsviz/embedder.hpp"
#include "stripsviz/error.hpp"
#include "stripsviz/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace stripsviz {

namespace {

int worker_count(int threads) {
#ifdef _OPENMP
    return threads <= 0 ? omp_get_max_threads() : threads;
#else
    (void)threads;
    return 1;
#endif
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Scales v down to length `limit` when it is longer; returns the final length.
double clamp_length(std::span<double> v, double limit) {
    const double len = norm(v);
    if (len <= limit) return len;
    const double f = limit / len;
    for (double& x : v) x *= f;
    return limit;
}

double distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct NodeUpdate {
    double step = 0.0;
    double bounded = 0.0;
    double jump = 0.0;
};

// Writes the new position of w into `out`. Reads only `base`.
NodeUpdate update_node(NodeId w, const EmbeddingSet& base, const TransitionGraph& g, const EmbedConfig& cfg,
                       std::span<const NodeId> repellers, double strength, std::span<double> out,
                       std::vector<double>& scratch) {
    const auto dim = static_cast<std::size_t>(base.dimension);
    scratch.assign(3 * dim, 0.0);
    std::span<double> repel(scratch.data(), dim);
    std::span<double> pull(scratch.data() + dim, dim);
    std::span<double> diff(scratch.data() + 2 * dim, dim);
    const auto wv = base.point(w);

    for (NodeId r : repellers) {
        if (r == w) continue;
        const auto rv = base.point(r);
        for (std::size_t i = 0; i < dim; ++i) diff[i] = wv[i] - rv[i];
        const double dist = norm(diff);
        if (dist == 0.0) {
            // Coincident: push apart along the first axis, direction fixed by id order.
            std::fill(diff.begin(), diff.end(), 0.0);
            diff[0] = w < r ? -1.0 : 1.0;
        } else {
            for (double& x : diff) x /= dist;
        }
        const double magnitude = strength / std::max(dist, cfg.epsilon);
        for (std::size_t i = 0; i < dim; ++i) repel[i] += magnitude * diff[i];
    }

    const auto nbrs = g.neighbors(w);
    NodeUpdate u;
    if (cfg.mode == EmbedMode::force_attraction) {
        for (NodeId n : nbrs) {
            const auto nv = base.point(n);
            for (std::size_t i = 0; i < dim; ++i) pull[i] += nv[i] - wv[i];
        }
        for (std::size_t i = 0; i < dim; ++i) pull[i] += repel[i];
        u.step = clamp_length(pull, cfg.alpha);
        u.bounded = u.step;
    } else {
        if (!nbrs.empty()) {
            for (NodeId n : nbrs) {
                const auto nv = base.point(n);
                for (std::size_t i = 0; i < dim; ++i) pull[i] += nv[i];
            }
            const double inv = 1.0 / static_cast<double>(nbrs.size());
            for (std::size_t i = 0; i < dim; ++i) pull[i] = 0.5 * (pull[i] * inv - wv[i]);
        }
        u.jump = norm(pull);
        u.bounded = clamp_length(repel, cfg.alpha);
        for (std::size_t i = 0; i < dim; ++i) pull[i] += repel[i];
        if (cfg.clamp_jump) {
            u.step = clamp_length(pull, cfg.alpha);
            u.bounded = u.step;
        } else {
            u.step = norm(pull);
        }
    }
    for (std::size_t i = 0; i < dim; ++i) out[i] = wv[i] + pull[i];
    return u;
}

} // namespace

std::string_view to_string(EmbedMode mode) {
    return mode == EmbedMode::half_jump ? "half-jump" : "force-attraction";
}

EmbedMode parse_embed_mode(std::string_view text) {
    if (text == "half-jump") return EmbedMode::half_jump;
    if (text == "force-attraction") return EmbedMode::force_attraction;
    throw Error("invalid_config", "unknown embedding mode '" + std::string(text) + "'");
}

void EmbedConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error("invalid_config", what); };
    if (iterations < 0) bad("iterations must be >= 0");
    if (!(alpha > 0.0)) bad("alpha must be > 0");
    if (dimension < 2) bad("dimension must be >= 2");
    if (repulsion_sample_size && *repulsion_sample_size < 1) bad("repulsion_sample_size must be >= 1");
    if (repulsion_strength && !(*repulsion_strength >= 0.0 && std::isfinite(*repulsion_strength))) {
        bad("repulsion_strength must be finite and >= 0");
    }
    if (!(epsilon > 0.0)) bad("epsilon must be > 0");
    if (!(init_low < init_high) || !std::isfinite(init_low) || !std::isfinite(init_high)) {
        bad("init range must be finite with low < high");
    }
    if (!(box_low < box_high) || !std::isfinite(box_low) || !std::isfinite(box_high)) {
        bad("display box must be finite with low < high");
    }
}

std::size_t EmbedConfig::sample_size(std::size_t node_count) const {
    std::size_t k = 1;
    if (repulsion_sample_size) {
        k = static_cast<std::size_t>(*repulsion_sample_size);
    } else if (node_count > 1) {
        k = static_cast<std::size_t>(std::ceil(std::log(static_cast<double>(node_count))));
    }
    return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(node_count, 1));
}

double EmbedConfig::strength(std::size_t node_count) const {
    if (repulsion_strength) return *repulsion_strength;
    return static_cast<double>(node_count) / static_cast<double>(sample_size(node_count));
}

bool EmbeddingSet::all_finite() const {
    return std::all_of(coords.begin(), coords.end(), [](double x) { return std::isfinite(x); });
}

EmbeddingSet init_embeddings(const TransitionGraph& g, const EmbedConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    EmbeddingSet e;
    e.dimension = cfg.dimension;
    e.seed = seed;
    e.iteration = 0;
    e.coords.resize(g.node_count() * static_cast<std::size_t>(cfg.dimension));
    SplitMix64 rng = make_stream(seed, 0);
    const double span = cfg.init_high - cfg.init_low;
    for (double& x : e.coords) x = std::min(cfg.init_low + span * rng.uniform(), cfg.init_high);
    return e;
}

std::vector<NodeId> repulsion_set(std::size_t node_count, const EmbedConfig& cfg, std::uint64_t seed,
                                  int iteration) {
    if (node_count == 0) return {};
    SplitMix64 rng = make_stream(seed, static_cast<std::uint64_t>(iteration) + 1);
    auto picked = sample_without_replacement(rng, node_count, cfg.sample_size(node_count));
    return {picked.begin(), picked.end()};
}

EmbeddingSet update_embeddings(const EmbeddingSet& base, const TransitionGraph& g, const EmbedConfig& cfg,
                               UpdateStats* stats, std::span<const NodeId> order) {
    const std::size_t n = g.node_count();
    if (base.size() != n) throw Error("invalid_embedding", "embedding does not cover the graph");
    if (!order.empty() && order.size() != n) throw Error("invalid_embedding", "order must list every node");
    const auto repellers = repulsion_set(n, cfg, base.seed, base.iteration);
    const double strength = cfg.strength(n);

    EmbeddingSet next;
    next.dimension = base.dimension;
    next.seed = base.seed;
    next.iteration = base.iteration + 1;
    next.coords.assign(base.coords.size(), 0.0);

    double max_step = 0.0;
    double max_bounded = 0.0;
    double max_jump = 0.0;
    const auto count = static_cast<std::int64_t>(n);
#ifdef _OPENMP
#pragma omp parallel num_threads(worker_count(cfg.threads)) reduction(max : max_step, max_bounded, max_jump)
#endif
    {
        std::vector<double> scratch;
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (std::int64_t k = 0; k < count; ++k) {
            const NodeId w = order.empty() ? static_cast<NodeId>(k) : order[static_cast<std::size_t>(k)];
            const NodeUpdate u = update_node(w, base, g, cfg, repellers, strength, next.point(w), scratch);
            max_step = std::max(max_step, u.step);
            max_bounded = std::max(max_bounded, u.bounded);
            max_jump = std::max(max_jump, u.jump);
        }
    }
    if (stats) {
        stats->max_step = std::max(stats->max_step, max_step);
        stats->max_bounded_step = std::max(stats->max_bounded_step, max_bounded);
        stats->max_jump = std::max(stats->max_jump, max_jump);
        stats->finite = stats->finite && next.all_finite();
    }
    return next;
}

EmbeddingSet embed(const TransitionGraph& g, const EmbedConfig& cfg, std::uint64_t seed,
                   const FrameCallback& on_frame, UpdateStats* stats) {
    EmbeddingSet e = init_embeddings(g, cfg, seed);
    if (on_frame) on_frame(e);
    for (int i = 0; i < cfg.iterations; ++i) {
        e = update_embeddings(e, g, cfg, stats);
        if (on_frame) on_frame(e);
    }
    if (cfg.rescale && e.size() > 0) e = rescale(e, Box::cube(cfg.dimension, cfg.box_low, cfg.box_high));
    return e;
}

Box Box::cube(int dimension, double low, double high) {
    return {std::vector<double>(static_cast<std::size_t>(dimension), low),
            std::vector<double>(static_cast<std::size_t>(dimension), high)};
}

EmbeddingSet rescale(const EmbeddingSet& e, const Box& box) {
    const auto dim = static_cast<std::size_t>(e.dimension);
    if (box.low.size() != dim || box.high.size() != dim) {
        throw Error("invalid_box", "box dimension does not match the embedding");
    }
    EmbeddingSet out = e;
    if (e.size() == 0) return out;
    std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
    for (std::size_t v = 0; v < e.size(); ++v) {
        const auto p = e.point(v);
        for (std::size_t i = 0; i < dim; ++i) {
            lo[i] = std::min(lo[i], p[i]);
            hi[i] = std::max(hi[i], p[i]);
        }
    }
    double scale = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < dim; ++i) {
        if (hi[i] > lo[i]) scale = std::min(scale, (box.high[i] - box.low[i]) / (hi[i] - lo[i]));
    }
    if (!std::isfinite(scale)) scale = 0.0; // all points coincide
    for (std::size_t v = 0; v < e.size(); ++v) {
        auto p = out.point(v);
        for (std::size_t i = 0; i < dim; ++i) {
            const double box_center = 0.5 * (box.low[i] + box.high[i]);
            const double data_center = 0.5 * (lo[i] + hi[i]);
            p[i] = box_center + (p[i] - data_center) * scale;
        }
    }
    return out;
}

double knn_preservation(const TransitionGraph& g, const EmbeddingSet& e, int k) {
    if (k < 1) throw Error("invalid_argument", "k must be >= 1");
    const std::size_t n = g.node_count();
    if (e.size() != n) throw Error("invalid_embedding", "embedding does not cover the graph");
    if (n < 2) return 0.0;
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n - 1);
    std::vector<double> score(n, -1.0);
#ifdef _OPENMP
#pragma omp parallel
#endif
    {
        std::vector<std::pair<double, NodeId>> dist;
#ifdef _OPENMP
#pragma omp for schedule(dynamic, 32)
#endif
        for (std::int64_t w = 0; w < static_cast<std::int64_t>(n); ++w) {
            const auto nbrs = g.neighbors(static_cast<NodeId>(w));
            if (nbrs.empty()) continue;
            dist.clear();
            for (NodeId v = 0; v < n; ++v) {
                if (v != w) dist.emplace_back(distance(e.point(w), e.point(v)), v);
            }
            std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk - 1), dist.end());
            std::size_t hits = 0;
            for (std::size_t i = 0; i < kk; ++i) {
                if (std::binary_search(nbrs.begin(), nbrs.end(), dist[i].second)) ++hits;
            }
            score[w] = static_cast<double>(hits) / static_cast<double>(std::min(kk, nbrs.size()));
        }
    }
    double sum = 0.0;
    std::size_t counted = 0;
    for (double s : score) {
        if (s >= 0.0) {
            sum += s;
            ++counted;
        }
    }
    return counted ? sum / static_cast<double>(counted) : 0.0;
}

double separation_ratio(const TransitionGraph& g, const EmbeddingSet& e, std::size_t samples, std::uint64_t seed) {
    const std::size_t n = g.node_count();
    if (e.size() != n) throw Error("invalid_embedding", "embedding does not cover the graph");
    const auto edges = g.edges();
    if (edges.empty() || n < 3) throw Error("invalid_argument", "graph too small for a separation ratio");
    double adjacent = 0.0;
    for (auto [a, b] : edges) adjacent += distance(e.point(a), e.point(b));
    adjacent /= static_cast<double>(edges.size());

    SplitMix64 rng(seed);
    double far = 0.0;
    std::size_t taken = 0;
    for (std::size_t attempts = 0; taken < samples && attempts < samples * 100; ++attempts) {
        const auto a = static_cast<NodeId>(rng.below(n));
        const auto b = static_cast<NodeId>(rng.below(n));
        if (a == b || g.adjacent(a, b)) continue;
        far += distance(e.point(a), e.point(b));
        ++taken;
    }
    if (taken == 0) throw Error("invalid_argument", "no non-adjacent pairs to sample");
    far /= static_cast<double>(taken);
    return far > 0.0 ? adjacent / far : std::numeric_limits<double>::infinity();
}

nlohmann::json to_json(const EmbedConfig& cfg) {
    nlohmann::json j = {{"iterations", cfg.iterations},
                        {"alpha", cfg.alpha},
                        {"dimension", cfg.dimension},
                        {"mode", to_string(cfg.mode)},
                        {"init_range", {cfg.init_low, cfg.init_high}},
                        {"epsilon", cfg.epsilon},
                        {"clamp_jump", cfg.clamp_jump},
                        {"rescale", cfg.rescale},
                        {"box", {cfg.box_low, cfg.box_high}}};
    j["repulsion_sample_size"] = cfg.repulsion_sample_size ? nlohmann::json(*cfg.repulsion_sample_size) : nlohmann::json();
    j["repulsion_strength"] = cfg.repulsion_strength ? nlohmann::json(*cfg.repulsion_strength) : nlohmann::json();
    return j;
}

EmbedConfig embed_config_from_json(const nlohmann::json& j, EmbedConfig cfg) {
    if (!j.is_object()) throw Error("invalid_config", "embedding config must be an object");
    try {
        if (j.contains("iterations")) cfg.iterations = j.at("iterations").get<int>();
        if (j.contains("alpha")) cfg.alpha = j.at("alpha").get<double>();
        if (j.contains("dimension")) cfg.dimension = j.at("dimension").get<int>();
        if (j.contains("mode")) cfg.mode = parse_embed_mode(j.at("mode").get<std::string>());
        if (j.contains("repulsion_sample_size") && !j.at("repulsion_sample_size").is_null()) {
            cfg.repulsion_sample_size = j.at("repulsion_sample_size").get<int>();
        }
        if (j.contains("repulsion_strength") && !j.at("repulsion_strength").is_null()) {
            cfg.repulsion_strength = j.at("repulsion_strength").get<double>();
        }
        if (j.contains("init_range")) {
            cfg.init_low = j.at("init_range").at(0).get<double>();
            cfg.init_high = j.at("init_range").at(1).get<double>();
        }
        if (j.contains("epsilon")) cfg.epsilon = j.at("epsilon").get<double>();
        if (j.contains("clamp_jump")) cfg.clamp_jump = j.at("clamp_jump").get<bool>();
        if (j.contains("rescale")) cfg.rescale = j.at("rescale").get<bool>();
        if (j.contains("box")) {
            cfg.box_low = j.at("box").at(0).get<double>();
            cfg.box_high = j.at("box").at(1).get<double>();
        }
        if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    } catch (const nlohmann::json::exception& ex) {
        throw Error("invalid_config", std::string("bad embedding config: ") + ex.what());
    }
    cfg.validate();
    return cfg;
}

namespace {

nlohmann::json node_array(const EmbeddingSet& e, const TransitionGraph& g) {
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId i = 0; i < g.node_count(); ++i) {
        const auto p = e.point(i);
        nodes.push_back({{"id", g.node(i).label},
                         {"kind", to_string(g.node(i).kind)},
                         {"xy", std::vector<double>(p.begin(), p.end())}});
    }
    return nodes;
}

} // namespace

nlohmann::json to_json(const EmbeddingSet& e, const TransitionGraph& g, const EmbedConfig* cfg) {
    nlohmann::json j = {{"schema", "stripsviz/embedding/v1"},
                        {"seed", e.seed},
                        {"iteration", e.iteration},
                        {"dimension", e.dimension},
                        {"nodes", node_array(e, g)}};
    if (cfg) j["config"] = to_json(*cfg);
    return j;
}

nlohmann::json frame_json(const EmbeddingSet& e, const TransitionGraph& g, bool final_frame) {
    return {{"schema", "stripsviz/embedding-frame/v1"},
            {"seed", e.seed},
            {"iteration", e.iteration},
            {"final", final_frame},
            {"dimension", e.dimension},
            {"nodes", node_array(e, g)}};
}

} // namespace stripsviz
