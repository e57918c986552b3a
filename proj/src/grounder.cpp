#include "stripsviz/error.hpp"
#include "stripsviz/pddl.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

namespace stripsviz {

namespace {

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

class ObjectTable {
public:
    ObjectTable(const DomainDescription& domain, const ProblemDescription& problem) : domain_(domain) {
        const bool typed = !domain.types.empty();
        auto add = [&](const TypedName& obj, bool from_problem) {
            if (!domain.has_type(obj.type)) {
                throw Error("unknown_type", "object '" + obj.name + "' has unknown type '" + obj.type + "'");
            }
            if (typed && from_problem && obj.type == "object") {
                throw Error("untyped_object", "object '" + obj.name + "' has no type");
            }
            auto [it, inserted] = types_.emplace(obj.name, obj.type);
            if (!inserted && it->second != obj.type) {
                throw Error("duplicate_object",
                            "object '" + obj.name + "' declared with types '" + it->second + "' and '" +
                                obj.type + "'");
            }
        };
        for (const auto& c : domain.constants) add(c, false);
        for (const auto& o : problem.objects) add(o, true);
    }

    bool contains(std::string_view name) const { return types_.find(std::string(name)) != types_.end(); }

    const std::string& type_of(const std::string& name) const { return types_.at(name); }

    std::vector<std::string> of_type(const std::string& type) const {
        std::vector<std::string> out;
        for (const auto& [name, t] : types_) {
            if (domain_.is_subtype(t, type)) out.push_back(name);
        }
        return out; // std::map iteration: sorted by name
    }

    std::vector<TypedName> entries() const {
        std::vector<TypedName> out;
        for (const auto& [name, t] : types_) out.push_back({name, t});
        return out;
    }

private:
    const DomainDescription& domain_;
    std::map<std::string, std::string> types_;
};

Fluent ground_fact(const Atom& atom, const DomainDescription& domain, const ObjectTable& objects,
                   std::string_view where) {
    const PredicateDecl* decl = domain.find_predicate(atom.predicate);
    if (!decl) {
        throw Error("unknown_predicate", "unknown predicate '" + atom.predicate + "' in " + std::string(where));
    }
    if (decl->params.size() != atom.args.size()) {
        throw Error("arity_mismatch", "predicate '" + atom.predicate + "' expects " +
                                          std::to_string(decl->params.size()) + " arguments in " +
                                          std::string(where));
    }
    for (std::size_t i = 0; i < atom.args.size(); ++i) {
        const auto& arg = atom.args[i];
        if (!objects.contains(arg)) {
            throw Error("unknown_object", "unknown object '" + arg + "' in " + std::string(where));
        }
        if (!domain.is_subtype(objects.type_of(arg), decl->params[i].type)) {
            throw Error("type_mismatch", "object '" + arg + "' of type '" + objects.type_of(arg) +
                                             "' does not fit parameter " + std::to_string(i + 1) +
                                             " of '" + atom.predicate + "'");
        }
    }
    return canonical_name(atom.predicate, atom.args);
}

// Atom with arguments resolved to either a parameter slot or a constant.
struct CompiledAtom {
    std::string predicate;
    std::vector<int> slots;           // parameter index, or -1 for a constant
    std::vector<std::string> constants;
    int last_slot = -1;               // highest parameter index referenced

    Fluent instantiate(const std::vector<const std::string*>& binding) const {
        Fluent out = predicate;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            out.push_back(kSeparator);
            out += slots[i] >= 0 ? *binding[slots[i]] : constants[i];
        }
        return out;
    }
};

CompiledAtom compile_atom(const Atom& atom, const ActionSchema& schema) {
    CompiledAtom c{atom.predicate, {}, {}, -1};
    for (const auto& arg : atom.args) {
        int slot = -1;
        if (arg[0] == '?') {
            for (std::size_t p = 0; p < schema.params.size(); ++p) {
                if (schema.params[p].name == arg) slot = static_cast<int>(p);
            }
        }
        c.slots.push_back(slot);
        c.constants.push_back(slot >= 0 ? std::string() : arg);
        c.last_slot = std::max(c.last_slot, slot);
    }
    return c;
}

class SchemaGrounder {
public:
    SchemaGrounder(const ActionSchema& schema, const ObjectTable& objects) : schema_(schema) {
        for (const auto& p : schema.params) candidates_.push_back(objects.of_type(p.type));
        for (const auto& a : schema.preconditions) pre_.push_back(compile_atom(a, schema));
        for (const auto& a : schema.add_effects) add_.push_back(compile_atom(a, schema));
        for (const auto& a : schema.delete_effects) del_.push_back(compile_atom(a, schema));
        checks_at_.resize(schema.params.size() + 1);
        for (std::size_t i = 0; i < pre_.size(); ++i) {
            checks_at_[static_cast<std::size_t>(pre_[i].last_slot + 1)].push_back(i);
        }
    }

    // Number of type-consistent bindings, saturating at `limit`.
    std::size_t binding_count(std::size_t limit) const {
        std::size_t count = 1;
        for (const auto& c : candidates_) {
            if (c.empty()) return 0;
            if (count > limit / c.size()) return limit;
            count *= c.size();
        }
        return count;
    }

    // Calls visit(action) for every binding whose preconditions all satisfy
    // `holds` (pass nullptr to accept every binding). With `only`, preconditions
    // of other predicates are not checked.
    template <class Visit>
    void enumerate(const std::unordered_set<Fluent>* holds, Visit&& visit,
                   const std::set<std::string>* only = nullptr) const {
        std::vector<const std::string*> binding(schema_.params.size(), nullptr);
        recurse(0, binding, holds, only, visit);
    }

private:
    template <class Visit>
    void recurse(std::size_t depth, std::vector<const std::string*>& binding,
                 const std::unordered_set<Fluent>* holds, const std::set<std::string>* only, Visit& visit) const {
        if (holds) {
            for (std::size_t idx : checks_at_[depth]) {
                if (only && !only->contains(pre_[idx].predicate)) continue;
                if (!holds->contains(pre_[idx].instantiate(binding))) return;
            }
        }
        if (depth == binding.size()) {
            visit(make_action(binding));
            return;
        }
        for (const auto& obj : candidates_[depth]) {
            binding[depth] = &obj;
            recurse(depth + 1, binding, holds, only, visit);
        }
    }

    GroundedAction make_action(const std::vector<const std::string*>& binding) const {
        GroundedAction a;
        a.schema = schema_.name;
        for (const auto* b : binding) a.args.push_back(*b);
        a.id = canonical_name(schema_.name, a.args);
        for (const auto& c : pre_) a.preconditions.push_back(c.instantiate(binding));
        for (const auto& c : add_) a.add_effects.push_back(c.instantiate(binding));
        for (const auto& c : del_) a.delete_effects.push_back(c.instantiate(binding));
        sort_unique(a.preconditions);
        sort_unique(a.add_effects);
        sort_unique(a.delete_effects);
        // Delete-then-add: an atom both deleted and added (after binding) stays true.
        std::vector<Fluent> del;
        std::set_difference(a.delete_effects.begin(), a.delete_effects.end(), a.add_effects.begin(),
                            a.add_effects.end(), std::back_inserter(del));
        a.delete_effects = std::move(del);
        return a;
    }

    const ActionSchema& schema_;
    std::vector<std::vector<std::string>> candidates_;
    std::vector<CompiledAtom> pre_, add_, del_;
    std::vector<std::vector<std::size_t>> checks_at_;
};

[[noreturn]] void cap_exceeded(std::size_t cap) {
    throw Error("cap_exceeded",
                "grounding exceeds the configured cap of " + std::to_string(cap) + " actions");
}

} // namespace

Pruning parse_pruning(std::string_view text) {
    if (text == "none") return Pruning::none;
    if (text == "static") return Pruning::static_facts;
    if (text == "reachable") return Pruning::reachable;
    throw Error("invalid_argument", "unknown pruning mode '" + std::string(text) + "' (expected none, static or reachable)");
}

std::string_view to_string(Pruning pruning) {
    switch (pruning) {
    case Pruning::none: return "none";
    case Pruning::static_facts: return "static";
    case Pruning::reachable: return "reachable";
    }
    return "reachable";
}

GroundedDomain ground(const DomainDescription& domain, const ProblemDescription& problem,
                      const GroundOptions& options) {
    const ObjectTable objects(domain, problem);

    std::vector<Fluent> init;
    for (const auto& a : problem.init) init.push_back(ground_fact(a, domain, objects, ":init"));
    std::vector<Fluent> goal;
    for (const auto& a : problem.goal) goal.push_back(ground_fact(a, domain, objects, ":goal"));

    std::vector<SchemaGrounder> grounders;
    for (const auto& s : domain.schemas) grounders.emplace_back(s, objects);

    std::map<std::string, GroundedAction> actions;
    if (options.pruning == Pruning::none) {
        std::size_t total = 0;
        for (const auto& g : grounders) {
            total += g.binding_count(options.max_actions + 1);
            if (total > options.max_actions) cap_exceeded(options.max_actions);
        }
        for (const auto& g : grounders) {
            g.enumerate(nullptr, [&](GroundedAction a) { actions.emplace(a.id, std::move(a)); });
        }
    } else if (options.pruning == Pruning::static_facts) {
        // Predicates no schema changes keep their initial extension forever.
        std::set<std::string> fixed;
        for (const auto& p : domain.predicates) fixed.insert(p.name);
        for (const auto& s : domain.schemas) {
            for (const auto* list : {&s.add_effects, &s.delete_effects}) {
                for (const auto& a : *list) fixed.erase(a.predicate);
            }
        }
        std::unordered_set<Fluent> facts;
        for (std::size_t i = 0; i < init.size(); ++i) {
            if (fixed.contains(problem.init[i].predicate)) facts.insert(init[i]);
        }
        for (const auto& g : grounders) {
            g.enumerate(&facts, [&](GroundedAction a) {
                actions.emplace(a.id, std::move(a));
                if (actions.size() > options.max_actions) cap_exceeded(options.max_actions);
            }, &fixed);
        }
    } else {
        std::unordered_set<Fluent> reached(init.begin(), init.end());
        bool changed = true;
        while (changed) {
            changed = false;
            for (const auto& g : grounders) {
                std::vector<GroundedAction> fresh;
                g.enumerate(&reached, [&](GroundedAction a) {
                    if (!actions.contains(a.id)) fresh.push_back(std::move(a));
                });
                for (auto& a : fresh) {
                    for (const auto& f : a.add_effects) changed |= reached.insert(f).second;
                    std::string id = a.id;
                    actions.emplace(std::move(id), std::move(a));
                    changed = true;
                }
                if (actions.size() > options.max_actions) cap_exceeded(options.max_actions);
            }
        }
    }

    GroundedDomain out;
    out.name = domain.name;
    out.objects = objects.entries();
    out.predicates = domain.predicates;
    std::vector<Fluent> changing;
    for (auto& [id, a] : actions) {
        out.fluents.insert(out.fluents.end(), a.preconditions.begin(), a.preconditions.end());
        out.fluents.insert(out.fluents.end(), a.add_effects.begin(), a.add_effects.end());
        out.fluents.insert(out.fluents.end(), a.delete_effects.begin(), a.delete_effects.end());
        changing.insert(changing.end(), a.add_effects.begin(), a.add_effects.end());
        changing.insert(changing.end(), a.delete_effects.begin(), a.delete_effects.end());
        out.actions.push_back(std::move(a));
    }
    out.fluents.insert(out.fluents.end(), init.begin(), init.end());
    out.fluents.insert(out.fluents.end(), goal.begin(), goal.end());
    sort_unique(out.fluents);
    sort_unique(changing);
    std::set_difference(out.fluents.begin(), out.fluents.end(), changing.begin(), changing.end(),
                        std::back_inserter(out.static_fluents));
    return out;
}

std::optional<std::size_t> GroundedDomain::fluent_index(std::string_view fluent) const {
    auto it = std::lower_bound(fluents.begin(), fluents.end(), fluent);
    if (it == fluents.end() || *it != fluent) return std::nullopt;
    return static_cast<std::size_t>(it - fluents.begin());
}

std::optional<std::size_t> GroundedDomain::action_index(std::string_view id) const {
    auto it = std::lower_bound(actions.begin(), actions.end(), id,
                               [](const GroundedAction& a, std::string_view key) { return a.id < key; });
    if (it == actions.end() || it->id != id) return std::nullopt;
    return static_cast<std::size_t>(it - actions.begin());
}

const GroundedAction* GroundedDomain::find_action(std::string_view id) const {
    auto idx = action_index(id);
    return idx ? &actions[*idx] : nullptr;
}

bool GroundedDomain::is_static(std::string_view fluent) const {
    return std::binary_search(static_fluents.begin(), static_fluents.end(), fluent);
}

bool GroundedDomain::has_object(std::string_view name) const {
    return std::any_of(objects.begin(), objects.end(), [&](const TypedName& o) { return o.name == name; });
}

ProblemInstance make_problem(const ProblemDescription& problem, const GroundedDomain& grounded) {
    auto canonicalize = [&](const Atom& atom, std::string_view section) {
        auto pred = std::find_if(grounded.predicates.begin(), grounded.predicates.end(),
                                 [&](const PredicateDecl& p) { return p.name == atom.predicate; });
        if (pred == grounded.predicates.end()) {
            throw Error("unknown_predicate",
                        "unknown predicate '" + atom.predicate + "' in " + std::string(section));
        }
        for (const auto& arg : atom.args) {
            if (!grounded.has_object(arg)) {
                throw Error("unknown_object", "unknown object '" + arg + "' in " + std::string(section));
            }
        }
        Fluent f = canonical_name(atom.predicate, atom.args);
        if (!grounded.fluent_index(f)) {
            throw Error("unknown_fluent",
                        "fluent '" + f + "' in " + std::string(section) + " is not in the grounded domain");
        }
        return f;
    };
    ProblemInstance out;
    for (const auto& a : problem.init) out.initial_state.push_back(canonicalize(a, ":init"));
    for (const auto& a : problem.goal) out.goal.push_back(canonicalize(a, ":goal"));
    sort_unique(out.initial_state);
    sort_unique(out.goal);
    return out;
}

ProblemInstance parse_problem(std::string_view text, const GroundedDomain& grounded) {
    return make_problem(parse_problem_description(text), grounded);
}

LoadedInstance load_instance(std::string_view domain_text, std::string_view problem_text,
                             const GroundOptions& options) {
    const DomainDescription dd = parse_domain(domain_text);
    const ProblemDescription pd = parse_problem_description(problem_text);
    LoadedInstance out;
    out.domain = ground(dd, pd, options);
    out.problem = make_problem(pd, out.domain);
    return out;
}

nlohmann::json to_json(const GroundedDomain& grounded) {
    nlohmann::json actions = nlohmann::json::array();
    for (const auto& a : grounded.actions) {
        actions.push_back({{"id", a.id}, {"pre", a.preconditions}, {"add", a.add_effects}, {"del", a.delete_effects}});
    }
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& o : grounded.objects) objects.push_back({{"name", o.name}, {"type", o.type}});
    return {{"schema", "stripsviz/grounded-domain/v1"},
            {"name", grounded.name},
            {"fluents", grounded.fluents},
            {"static_fluents", grounded.static_fluents},
            {"objects", objects},
            {"actions", actions}};
}

nlohmann::json to_json(const ProblemInstance& problem) {
    return {{"schema", "stripsviz/problem/v1"}, {"initial_state", problem.initial_state}, {"goal", problem.goal}};
}

} // namespace stripsviz
