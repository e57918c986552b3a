#include "stripsviz/planner.hpp"
#include "stripsviz/error.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <sstream>
#include <unordered_set>

namespace stripsviz {

namespace {

std::string join(const std::vector<Fluent>& items) {
    std::string out;
    for (const auto& s : items) {
        if (!out.empty()) out += ", ";
        out += s;
    }
    return out;
}

// Grounded domain compiled to fluent indices for search.
struct CompiledTask {
    std::size_t words = 0;
    std::vector<std::vector<std::uint32_t>> pre, add, del;

    explicit CompiledTask(const GroundedDomain& d) : words((d.fluents.size() + 63) / 64) {
        auto indices = [&](const std::vector<Fluent>& fluents) {
            std::vector<std::uint32_t> out;
            for (const auto& f : fluents) out.push_back(static_cast<std::uint32_t>(*d.fluent_index(f)));
            return out;
        };
        for (const auto& a : d.actions) {
            pre.push_back(indices(a.preconditions));
            add.push_back(indices(a.add_effects));
            del.push_back(indices(a.delete_effects));
        }
    }
};

bool test_bit(const std::uint64_t* bits, std::uint32_t i) { return (bits[i >> 6] >> (i & 63)) & 1U; }
void set_bit(std::uint64_t* bits, std::uint32_t i) { bits[i >> 6] |= std::uint64_t{1} << (i & 63); }
void clear_bit(std::uint64_t* bits, std::uint32_t i) { bits[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

// Append-only store of search nodes with duplicate detection on the state bits.
class StateStore {
public:
    explicit StateStore(std::size_t words) : words_(words), index_(64, Hash{this}, Equal{this}) {}

    const std::uint64_t* bits(std::uint32_t id) const { return arena_.data() + id * words_; }
    std::size_t size() const { return parent_.size(); }
    std::uint32_t parent(std::uint32_t id) const { return parent_[id]; }
    std::uint32_t via(std::uint32_t id) const { return via_[id]; }

    // Returns the id of the new node, or nullopt if the state was seen before.
    std::optional<std::uint32_t> insert(const std::vector<std::uint64_t>& state, std::uint32_t parent,
                                        std::uint32_t via) {
        const auto id = static_cast<std::uint32_t>(parent_.size());
        arena_.insert(arena_.end(), state.begin(), state.end());
        parent_.push_back(parent);
        via_.push_back(via);
        if (!index_.insert(id).second) {
            arena_.resize(arena_.size() - words_);
            parent_.pop_back();
            via_.pop_back();
            return std::nullopt;
        }
        return id;
    }

private:
    struct Hash {
        const StateStore* store;
        std::size_t operator()(std::uint32_t id) const {
            const std::uint64_t* b = store->bits(id);
            std::uint64_t h = 0xcbf29ce484222325ULL;
            for (std::size_t i = 0; i < store->words_; ++i) {
                h ^= b[i] + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
            }
            return static_cast<std::size_t>(h);
        }
    };
    struct Equal {
        const StateStore* store;
        bool operator()(std::uint32_t a, std::uint32_t b) const {
            return std::equal(store->bits(a), store->bits(a) + store->words_, store->bits(b));
        }
    };

    std::size_t words_;
    std::vector<std::uint64_t> arena_;
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> via_;
    std::unordered_set<std::uint32_t, Hash, Equal> index_;
};

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

} // namespace

bool State::holds(std::string_view fluent) const {
    return std::binary_search(true_fluents.begin(), true_fluents.end(), fluent);
}

State make_state(std::vector<Fluent> fluents) {
    std::sort(fluents.begin(), fluents.end());
    fluents.erase(std::unique(fluents.begin(), fluents.end()), fluents.end());
    return State{std::move(fluents)};
}

State apply(const State& s, const GroundedAction& a) {
    std::vector<Fluent> missing;
    for (const auto& p : a.preconditions) {
        if (!s.holds(p)) missing.push_back(p);
    }
    if (!missing.empty()) {
        throw Error("precondition_violation", "action '" + a.id + "' is missing preconditions: " + join(missing));
    }
    std::vector<Fluent> kept;
    std::set_difference(s.true_fluents.begin(), s.true_fluents.end(), a.delete_effects.begin(),
                        a.delete_effects.end(), std::back_inserter(kept));
    State out;
    std::set_union(kept.begin(), kept.end(), a.add_effects.begin(), a.add_effects.end(),
                   std::back_inserter(out.true_fluents));
    return out;
}

FluentCoordinates::FluentCoordinates(const TransitionGraph& g, const EmbeddingSet& e) {
    if (e.size() != g.node_count()) throw Error("invalid_embedding", "embedding does not cover the graph");
    for (NodeId i = 0; i < g.node_count(); ++i) {
        if (g.node(i).kind != NodeKind::fluent) continue;
        const auto p = e.point(i);
        points_.emplace(g.node(i).label, std::vector<double>(p.begin(), p.end()));
    }
}

const std::vector<double>* FluentCoordinates::find(std::string_view fluent) const {
    auto it = points_.find(std::string(fluent));
    return it == points_.end() ? nullptr : &it->second;
}

double embedding_distance(const FluentCoordinates& coords, std::span<const Fluent> state,
                          std::span<const Fluent> goal) {
    double h = 0.0;
    for (const auto& g : goal) {
        if (std::find(state.begin(), state.end(), g) != state.end()) continue;
        const auto* gp = coords.find(g);
        if (!gp) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& f : state) {
            const auto* fp = coords.find(f);
            if (!fp) continue;
            double s = 0.0;
            for (std::size_t i = 0; i < gp->size(); ++i) {
                const double d = (*gp)[i] - (*fp)[i];
                s += d * d;
            }
            best = std::min(best, std::sqrt(s));
        }
        if (std::isfinite(best)) h += best;
    }
    return h;
}

std::string_view to_string(HeuristicKind kind) {
    return kind == HeuristicKind::blind ? "blind" : "embedding";
}

HeuristicKind parse_heuristic(std::string_view text) {
    if (text == "blind") return HeuristicKind::blind;
    if (text == "embedding") return HeuristicKind::embedding;
    throw Error("invalid_argument", "unknown heuristic '" + std::string(text) + "'");
}

PlanResult plan(const GroundedDomain& domain, const State& s0, std::span<const Fluent> goal,
                const PlannerConfig& cfg, const FluentCoordinates* coords) {
    std::vector<std::uint32_t> goal_idx;
    for (const auto& g : goal) {
        auto idx = domain.fluent_index(g);
        if (!idx) throw Error("unknown_goal", "goal fluent '" + g + "' is not in the grounded domain");
        goal_idx.push_back(static_cast<std::uint32_t>(*idx));
    }
    const CompiledTask task(domain);
    std::vector<std::uint64_t> initial(task.words, 0);
    for (const auto& f : s0.true_fluents) {
        auto idx = domain.fluent_index(f);
        if (!idx) throw Error("invalid_state", "state fluent '" + f + "' is not in the grounded domain");
        set_bit(initial.data(), static_cast<std::uint32_t>(*idx));
    }

    // Per-goal distance to every embedded fluent, so h(s) needs no string lookups.
    std::vector<std::vector<double>> goal_dist;
    if (coords) {
        for (std::uint32_t g : goal_idx) {
            std::vector<double> row(domain.fluents.size(), std::numeric_limits<double>::quiet_NaN());
            const auto* gp = coords->find(domain.fluents[g]);
            if (gp) {
                for (std::size_t f = 0; f < domain.fluents.size(); ++f) {
                    const auto* fp = coords->find(domain.fluents[f]);
                    if (!fp) continue;
                    double s = 0.0;
                    for (std::size_t i = 0; i < gp->size(); ++i) {
                        const double d = (*gp)[i] - (*fp)[i];
                        s += d * d;
                    }
                    row[f] = std::sqrt(s);
                }
            }
            goal_dist.push_back(std::move(row));
        }
    }
    auto heuristic = [&](const std::uint64_t* bits) {
        double h = 0.0;
        for (std::size_t k = 0; k < goal_idx.size(); ++k) {
            if (test_bit(bits, goal_idx[k])) continue;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t w = 0; w < task.words; ++w) {
                std::uint64_t word = bits[w];
                while (word) {
                    const auto f = static_cast<std::size_t>(w * 64 + static_cast<std::size_t>(std::countr_zero(word)));
                    word &= word - 1;
                    const double d = goal_dist[k][f];
                    if (!std::isnan(d)) best = std::min(best, d);
                }
            }
            if (std::isfinite(best)) h += best;
        }
        return h;
    };
    auto is_goal = [&](const std::uint64_t* bits) {
        return std::all_of(goal_idx.begin(), goal_idx.end(), [&](std::uint32_t g) { return test_bit(bits, g); });
    };

    StateStore store(task.words);
    PlanResult result;
    const std::uint32_t root = *store.insert(initial, kNone, kNone);
    result.generated = 1;

    // Open list: FIFO for blind search; (h, insertion order) for greedy search.
    using Entry = std::pair<double, std::uint64_t>;
    std::priority_queue<std::pair<Entry, std::uint32_t>, std::vector<std::pair<Entry, std::uint32_t>>,
                        std::greater<>>
        open_greedy;
    std::deque<std::uint32_t> open_fifo;
    std::uint64_t sequence = 0;
    auto push = [&](std::uint32_t id) {
        if (coords) {
            open_greedy.push({{heuristic(store.bits(id)), sequence++}, id});
        } else {
            open_fifo.push_back(id);
        }
    };
    auto pop = [&]() {
        std::uint32_t id;
        if (coords) {
            id = open_greedy.top().second;
            open_greedy.pop();
        } else {
            id = open_fifo.front();
            open_fifo.pop_front();
        }
        return id;
    };
    auto open_empty = [&]() { return coords ? open_greedy.empty() : open_fifo.empty(); };

    push(root);
    std::vector<std::uint64_t> child(task.words);
    while (!open_empty()) {
        const std::uint32_t id = pop();
        if (is_goal(store.bits(id))) {
            std::vector<std::string> actions;
            for (std::uint32_t n = id; store.parent(n) != kNone; n = store.parent(n)) {
                actions.push_back(domain.actions[store.via(n)].id);
            }
            std::reverse(actions.begin(), actions.end());
            result.status = PlanStatus::solved;
            result.plan.cost = static_cast<int>(actions.size());
            result.plan.actions = std::move(actions);
            return result;
        }
        if (result.expanded >= cfg.node_budget) {
            throw Error("budget_exceeded",
                        "search exceeded the node budget of " + std::to_string(cfg.node_budget) + " expansions");
        }
        ++result.expanded;
        for (std::size_t a = 0; a < task.pre.size(); ++a) {
            const std::uint64_t* bits = store.bits(id);
            const bool applicable = std::all_of(task.pre[a].begin(), task.pre[a].end(),
                                                [&](std::uint32_t p) { return test_bit(bits, p); });
            if (!applicable) continue;
            std::copy(bits, bits + task.words, child.begin());
            for (std::uint32_t f : task.del[a]) clear_bit(child.data(), f);
            for (std::uint32_t f : task.add[a]) set_bit(child.data(), f);
            if (auto cid = store.insert(child, id, static_cast<std::uint32_t>(a))) {
                ++result.generated;
                push(*cid);
            }
        }
    }
    result.status = PlanStatus::unsolvable;
    return result;
}

std::string ValidationReport::describe() const {
    if (valid) return "valid";
    std::string out = "step " + std::to_string(failing_step.value_or(0)) + ": " + reason;
    if (!missing.empty()) out += " (missing " + join(missing) + ")";
    return out;
}

ValidationReport validate(const GroundedDomain& domain, const State& s0, const Plan& plan,
                          std::span<const Fluent> goal) {
    ValidationReport report;
    State s = s0;
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const GroundedAction* a = domain.find_action(plan.actions[i]);
        if (!a) {
            report.valid = false;
            report.failing_step = i;
            report.reason = "unknown_action";
            report.missing = {plan.actions[i]};
            return report;
        }
        for (const auto& p : a->preconditions) {
            if (!s.holds(p)) report.missing.push_back(p);
        }
        if (!report.missing.empty()) {
            report.valid = false;
            report.failing_step = i;
            report.reason = "precondition";
            return report;
        }
        s = apply(s, *a);
    }
    for (const auto& g : goal) {
        if (!s.holds(g)) report.missing.push_back(g);
    }
    if (!report.missing.empty()) {
        std::sort(report.missing.begin(), report.missing.end());
        report.valid = false;
        report.failing_step = plan.actions.size();
        report.reason = "goal";
    }
    return report;
}

std::string to_ipc(const Plan& plan, const GroundedDomain& domain) {
    std::ostringstream os;
    for (const auto& id : plan.actions) {
        const GroundedAction* a = domain.find_action(id);
        if (!a) throw Error("unknown_action", "unknown action '" + id + "'");
        os << '(' << a->schema;
        for (const auto& arg : a->args) os << ' ' << arg;
        os << ")\n";
    }
    os << "; cost = " << plan.cost << " (unit cost)\n";
    return os.str();
}

Plan parse_plan(std::string_view text, const GroundedDomain& domain) {
    Plan plan;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (auto c = line.find(';'); c != std::string::npos) line.erase(c);
        std::string word;
        std::vector<std::string> parts;
        for (char& ch : line) {
            if (ch == '(' || ch == ')') ch = ' ';
            ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        }
        std::istringstream tokens(line);
        while (tokens >> word) parts.push_back(word);
        if (parts.empty()) continue;
        std::string id = parts.size() == 1 ? parts[0]
                                           : canonical_name(parts[0], std::span<const std::string>(parts).subspan(1));
        if (!domain.find_action(id)) throw Error("unknown_action", "unknown action '" + id + "' in plan");
        plan.actions.push_back(std::move(id));
    }
    plan.cost = static_cast<int>(plan.actions.size());
    return plan;
}

nlohmann::json to_json(const Plan& plan) {
    return {{"schema", "stripsviz/plan/v1"}, {"actions", plan.actions}, {"cost", plan.cost}};
}

nlohmann::json to_json(const State& state) {
    return {{"schema", "stripsviz/state/v1"}, {"true_fluents", state.true_fluents}};
}

} // namespace stripsviz
