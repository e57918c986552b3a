#include "stripsviz/overlay.hpp"
#include "stripsviz/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace stripsviz {

PlanTrace trace_from_plan(const GroundedDomain& domain, const State& s0, const Plan& plan) {
    const ValidationReport report = validate(domain, s0, plan, {});
    if (!report.valid) throw Error("invalid_plan", "plan does not execute: " + report.describe());
    PlanTrace trace;
    trace.states.push_back(s0);
    for (const auto& id : plan.actions) {
        const GroundedAction& a = *domain.find_action(id);
        trace.steps.push_back({a.id, a.preconditions, a.add_effects, a.delete_effects});
        trace.states.push_back(apply(trace.states.back(), a));
    }
    return trace;
}

std::string_view to_string(SegmentKind kind) {
    return kind == SegmentKind::consumed ? "consumed" : "produced";
}

std::string_view to_string(NodeClass cls) {
    switch (cls) {
    case NodeClass::current: return "current";
    case NodeClass::action: return "action";
    case NodeClass::other: return "other";
    }
    return "other";
}

std::string_view color_of(NodeClass cls) {
    switch (cls) {
    case NodeClass::current: return "red";
    case NodeClass::action: return "green";
    case NodeClass::other: return "blue";
    }
    return "blue";
}

std::string_view color_of(SegmentKind kind) {
    return kind == SegmentKind::consumed ? "red" : "black";
}

std::vector<NodeClass> node_classes(const TransitionGraph& g, const State& current) {
    std::vector<NodeClass> classes(g.node_count(), NodeClass::other);
    for (NodeId i = 0; i < g.node_count(); ++i) {
        if (g.node(i).kind == NodeKind::action) {
            classes[i] = NodeClass::action;
        } else if (current.holds(g.node(i).label)) {
            classes[i] = NodeClass::current;
        }
    }
    return classes;
}

OverlayGeometry overlay_geometry(const PlanTrace& trace, const TransitionGraph& g, const EmbeddingSet& e) {
    if (e.size() != g.node_count()) throw Error("invalid_embedding", "embedding does not cover the graph");
    OverlayGeometry out;
    for (std::size_t step = 0; step < trace.steps.size(); ++step) {
        const TraceStep& s = trace.steps[step];
        const auto action = g.find_action(s.action_id);
        auto emit = [&](const std::vector<Fluent>& fluents, SegmentKind kind) {
            for (const auto& f : fluents) {
                const auto fluent = g.find_fluent(f);
                if (!fluent) {
                    out.unplaced.push_back(f);
                    continue;
                }
                if (action) out.segments.push_back({*action, *fluent, kind, step});
            }
        };
        if (!action) out.unplaced.push_back(s.action_id);
        emit(s.consumed, SegmentKind::consumed);
        emit(s.produced, SegmentKind::produced);
    }
    std::sort(out.unplaced.begin(), out.unplaced.end());
    out.unplaced.erase(std::unique(out.unplaced.begin(), out.unplaced.end()), out.unplaced.end());
    out.node_classes = node_classes(g, trace.states.back());
    return out;
}

FluentFamily FluentFamily::from_regex(const std::string& pattern) {
    FluentFamily f;
    f.kind_ = Kind::regex;
    try {
        f.regex_ = std::regex(pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& ex) {
        throw Error("invalid_argument", "bad family pattern '" + pattern + "': " + ex.what());
    }
    return f;
}

FluentFamily FluentFamily::from_prefixes(std::vector<std::string> prefixes) {
    FluentFamily f;
    f.kind_ = Kind::prefixes;
    f.items_ = std::move(prefixes);
    return f;
}

FluentFamily FluentFamily::from_list(std::vector<Fluent> members) {
    FluentFamily f;
    f.kind_ = Kind::list;
    std::sort(members.begin(), members.end());
    f.items_ = std::move(members);
    return f;
}

bool FluentFamily::contains(std::string_view fluent) const {
    switch (kind_) {
    case Kind::regex: return std::regex_match(fluent.begin(), fluent.end(), regex_);
    case Kind::prefixes:
        return std::any_of(items_.begin(), items_.end(), [&](const std::string& p) { return fluent.starts_with(p); });
    case Kind::list: return std::binary_search(items_.begin(), items_.end(), fluent);
    }
    return false;
}

std::vector<TrajectoryPoint> fluent_trajectory(const PlanTrace& trace, const FluentFamily& family) {
    std::vector<TrajectoryPoint> out;
    for (std::size_t i = 0; i < trace.states.size(); ++i) {
        std::vector<Fluent> members;
        for (const auto& f : trace.states[i].true_fluents) {
            if (family.contains(f)) members.push_back(f);
        }
        if (members.size() != 1) {
            throw Error("mutex_violation", "state " + std::to_string(i) + " holds " + std::to_string(members.size()) +
                                               " members of the fluent family (expected exactly 1)");
        }
        if (out.empty() || out.back().fluent != members.front()) out.push_back({members.front(), i});
    }
    return out;
}

nlohmann::json to_json(const PlanTrace& trace) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& s : trace.steps) {
        steps.push_back({{"action", s.action_id}, {"consumed", s.consumed}, {"produced", s.produced}, {"deleted", s.deleted}});
    }
    nlohmann::json states = nlohmann::json::array();
    for (const auto& s : trace.states) states.push_back(s.true_fluents);
    return {{"schema", "stripsviz/trace/v1"}, {"steps", steps}, {"states", states}};
}

nlohmann::json to_json(const OverlayGeometry& overlay, const TransitionGraph& g, const EmbeddingSet& e) {
    auto xy = [&](NodeId id) {
        const auto p = e.point(id);
        return std::vector<double>(p.begin(), p.end());
    };
    nlohmann::json segments = nlohmann::json::array();
    for (const auto& s : overlay.segments) {
        segments.push_back({{"from", g.node(s.from).label},
                            {"to", g.node(s.to).label},
                            {"kind", to_string(s.kind)},
                            {"step", s.step},
                            {"from_xy", xy(s.from)},
                            {"to_xy", xy(s.to)}});
    }
    nlohmann::json classes = nlohmann::json::object();
    for (NodeId i = 0; i < g.node_count() && i < overlay.node_classes.size(); ++i) {
        classes[g.node(i).label] = to_string(overlay.node_classes[i]);
    }
    return {{"schema", "stripsviz/overlay/v1"},
            {"segments", segments},
            {"node_classes", classes},
            {"unplaced", overlay.unplaced}};
}

namespace {

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

std::string render_svg(const TransitionGraph& g, const EmbeddingSet& e, const std::vector<NodeClass>& classes,
                       const OverlayGeometry* overlay, const SvgOptions& options) {
    if (e.size() != g.node_count()) throw Error("invalid_embedding", "embedding does not cover the graph");
    if (classes.size() != g.node_count()) throw Error("invalid_argument", "one class per node is required");
    double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    double hi[2] = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (std::size_t v = 0; v < e.size(); ++v) {
        for (int i = 0; i < 2; ++i) {
            lo[i] = std::min(lo[i], e.point(v)[i]);
            hi[i] = std::max(hi[i], e.point(v)[i]);
        }
    }
    const double inner_w = options.width - 2 * options.margin;
    const double inner_h = options.height - 2 * options.margin;
    double scale = std::numeric_limits<double>::infinity();
    if (hi[0] > lo[0]) scale = std::min(scale, inner_w / (hi[0] - lo[0]));
    if (hi[1] > lo[1]) scale = std::min(scale, inner_h / (hi[1] - lo[1]));
    if (!std::isfinite(scale)) scale = 0.0;
    auto px = [&](NodeId v) {
        const auto p = e.point(v);
        return std::pair{options.width / 2 + (p[0] - 0.5 * (lo[0] + hi[0])) * scale,
                         options.height / 2 - (p[1] - 0.5 * (lo[1] + hi[1])) * scale};
    };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\"" << options.height
       << "\" viewBox=\"0 0 " << options.width << ' ' << options.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g id=\"nodes\">\n";
    for (NodeId v = 0; v < g.node_count(); ++v) {
        if (!options.show_actions && g.node(v).kind == NodeKind::action) continue;
        auto [x, y] = px(v);
        os << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"" << options.node_radius << "\" fill=\""
           << color_of(classes[v]) << "\"><title>" << escape_xml(g.node(v).label) << "</title></circle>\n";
        if (options.labels) {
            os << "<text x=\"" << x + options.node_radius + 1 << "\" y=\"" << y << "\" font-size=\"6\">"
               << escape_xml(g.node(v).label) << "</text>\n";
        }
    }
    os << "</g>\n";
    if (overlay) {
        os << "<g id=\"overlay\">\n";
        for (const auto& s : overlay->segments) {
            auto [x1, y1] = px(s.from);
            auto [x2, y2] = px(s.to);
            os << "<line x1=\"" << x1 << "\" y1=\"" << y1 << "\" x2=\"" << x2 << "\" y2=\"" << y2 << "\" stroke=\""
               << color_of(s.kind) << "\" stroke-width=\"1\" data-step=\"" << s.step << "\"/>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace stripsviz
