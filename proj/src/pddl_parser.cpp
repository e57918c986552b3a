#include "stripsviz/pddl.hpp"
#include "stripsviz/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace stripsviz {

namespace {

struct Token {
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

std::vector<Token> tokenize(std::string_view input) {
    std::vector<Token> tokens;
    std::size_t line = 1;
    std::size_t column = 1;
    std::size_t i = 0;
    auto advance = [&]() {
        if (input[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
        ++i;
    };
    while (i < input.size()) {
        const char c = input[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance();
            continue;
        }
        if (c == ';') {
            while (i < input.size() && input[i] != '\n') advance();
            continue;
        }
        if (c == '(' || c == ')') {
            tokens.push_back({std::string(1, c), line, column});
            advance();
            continue;
        }
        Token tok{{}, line, column};
        while (i < input.size() && !std::isspace(static_cast<unsigned char>(input[i])) &&
               input[i] != '(' && input[i] != ')' && input[i] != ';') {
            tok.text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(input[i]))));
            advance();
        }
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

struct SExpr {
    bool is_atom = false;
    std::string atom;
    std::vector<SExpr> children;
    std::size_t line = 1;
    std::size_t column = 1;

    bool is_list() const { return !is_atom; }
    bool head_is(std::string_view keyword) const {
        return is_list() && !children.empty() && children[0].is_atom && children[0].atom == keyword;
    }
};

[[noreturn]] void fail(const std::string& message, const SExpr& at) {
    throw ParseError(message, at.line, at.column);
}

SExpr parse_sexpr(const std::vector<Token>& tokens, std::size_t& pos) {
    const Token& tok = tokens[pos];
    if (tok.text == ")") throw ParseError("unexpected ')'", tok.line, tok.column);
    SExpr expr;
    expr.line = tok.line;
    expr.column = tok.column;
    ++pos;
    if (tok.text != "(") {
        expr.is_atom = true;
        expr.atom = tok.text;
        return expr;
    }
    while (true) {
        if (pos >= tokens.size()) throw ParseError("unmatched '('", tok.line, tok.column);
        if (tokens[pos].text == ")") {
            ++pos;
            return expr;
        }
        expr.children.push_back(parse_sexpr(tokens, pos));
    }
}

SExpr parse_document(std::string_view text) {
    const auto tokens = tokenize(text);
    if (tokens.empty()) throw ParseError("empty input", 1, 1);
    std::size_t pos = 0;
    SExpr root = parse_sexpr(tokens, pos);
    if (pos != tokens.size()) {
        throw ParseError("trailing content after top-level expression", tokens[pos].line,
                         tokens[pos].column);
    }
    if (!root.head_is("define")) fail("expected (define ...)", root);
    return root;
}

const std::string& expect_atom(const SExpr& e, std::string_view what) {
    if (!e.is_atom) fail("expected " + std::string(what), e);
    return e.atom;
}

void check_name(const SExpr& e, std::string_view what) {
    const std::string& name = expect_atom(e, what);
    if (name.find(kSeparator) != std::string::npos) {
        fail(std::string(what) + " '" + name + "' contains the reserved character '_'", e);
    }
    if (name.empty() || name[0] == '?' || name[0] == ':' || name == "-") {
        fail("invalid " + std::string(what) + " '" + name + "'", e);
    }
}

// "a b - t1 c - t2 d" -> (a,t1) (b,t1) (c,t2) (d,object)
std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items, std::size_t start,
                                        bool variables) {
    std::vector<TypedName> out;
    std::vector<TypedName> pending;
    for (std::size_t i = start; i < items.size(); ++i) {
        const SExpr& item = items[i];
        if (item.is_atom && item.atom == "-") {
            if (i + 1 >= items.size()) fail("missing type after '-'", item);
            const SExpr& type = items[i + 1];
            if (type.head_is("either")) {
                throw UnsupportedError("either-types", "(either ...) types are not supported");
            }
            check_name(type, "type name");
            if (pending.empty()) fail("'-' without preceding names", item);
            for (auto& p : pending) {
                p.type = type.atom;
                out.push_back(std::move(p));
            }
            pending.clear();
            ++i;
            continue;
        }
        if (variables) {
            const std::string& v = expect_atom(item, "variable");
            if (v.size() < 2 || v[0] != '?') fail("expected variable, got '" + v + "'", item);
            if (v.find(kSeparator) != std::string::npos) {
                fail("variable '" + v + "' contains the reserved character '_'", item);
            }
        } else {
            check_name(item, "name");
        }
        pending.push_back({item.atom, "object"});
    }
    for (auto& p : pending) out.push_back(std::move(p));
    return out;
}

const std::set<std::string, std::less<>> kSupportedRequirements = {":strips", ":typing"};

std::vector<std::string> parse_requirements(const SExpr& section) {
    std::vector<std::string> reqs;
    for (std::size_t i = 1; i < section.children.size(); ++i) {
        const std::string& r = expect_atom(section.children[i], "requirement");
        if (!kSupportedRequirements.contains(r)) {
            throw UnsupportedError(r, "unsupported requirement " + r +
                                          " (only :strips and :typing are supported)");
        }
        reqs.push_back(r);
    }
    return reqs;
}

Atom parse_atom(const SExpr& e) {
    if (!e.is_list() || e.children.empty()) fail("expected atom", e);
    const std::string& head = expect_atom(e.children[0], "predicate name");
    if (head == "not") {
        throw UnsupportedError("negative-preconditions",
                               "negative literals are only allowed as delete effects");
    }
    if (head == "=") throw UnsupportedError("equality", "equality constraints are not supported");
    if (head == "or" || head == "imply") {
        throw UnsupportedError("disjunctive-preconditions", "'" + head + "' is not supported");
    }
    if (head == "exists" || head == "forall") {
        throw UnsupportedError("quantified-preconditions", "'" + head + "' is not supported");
    }
    if (head == "when") throw UnsupportedError("conditional-effects", "'when' is not supported");
    if (head == "increase" || head == "decrease" || head == "assign" || head == "scale-up" ||
        head == "scale-down") {
        throw UnsupportedError("numeric-fluents", "'" + head + "' is not supported");
    }
    Atom atom{head, {}};
    for (std::size_t i = 1; i < e.children.size(); ++i) {
        atom.args.push_back(expect_atom(e.children[i], "argument"));
    }
    return atom;
}

// Flattens nested (and ...) into a conjunction of positive atoms.
void parse_condition(const SExpr& e, std::vector<Atom>& out, std::vector<const SExpr*>* where) {
    if (e.is_atom) fail("expected condition, got '" + e.atom + "'", e);
    if (e.children.empty()) return;
    if (e.head_is("and")) {
        for (std::size_t i = 1; i < e.children.size(); ++i) parse_condition(e.children[i], out, where);
        return;
    }
    out.push_back(parse_atom(e));
    if (where) where->push_back(&e);
}

void parse_effect(const SExpr& e, std::vector<Atom>& add, std::vector<Atom>& del,
                  std::vector<const SExpr*>& add_at, std::vector<const SExpr*>& del_at) {
    if (e.is_atom) fail("expected effect, got '" + e.atom + "'", e);
    if (e.children.empty()) return;
    if (e.head_is("and")) {
        for (std::size_t i = 1; i < e.children.size(); ++i) {
            parse_effect(e.children[i], add, del, add_at, del_at);
        }
        return;
    }
    if (e.head_is("forall")) {
        throw UnsupportedError("conditional-effects", "universal effects are not supported");
    }
    if (e.head_is("not")) {
        if (e.children.size() != 2) fail("(not ...) takes exactly one atom", e);
        del.push_back(parse_atom(e.children[1]));
        del_at.push_back(&e.children[1]);
        return;
    }
    add.push_back(parse_atom(e));
    add_at.push_back(&e);
}

struct DomainChecker {
    const DomainDescription& domain;

    void check_atom(const Atom& atom, const SExpr& at, const std::vector<TypedName>& params) const {
        const PredicateDecl* decl = domain.find_predicate(atom.predicate);
        if (!decl) fail("undeclared predicate '" + atom.predicate + "'", at);
        if (decl->params.size() != atom.args.size()) {
            fail("predicate '" + atom.predicate + "' expects " + std::to_string(decl->params.size()) +
                     " arguments, got " + std::to_string(atom.args.size()),
                 at);
        }
        for (const auto& arg : atom.args) {
            if (arg[0] == '?') {
                const bool known = std::any_of(params.begin(), params.end(),
                                               [&](const TypedName& p) { return p.name == arg; });
                if (!known) fail("variable '" + arg + "' is not a parameter", at);
            } else {
                const bool known =
                    std::any_of(domain.constants.begin(), domain.constants.end(),
                                [&](const TypedName& c) { return c.name == arg; });
                if (!known) fail("unknown constant '" + arg + "'", at);
            }
        }
    }
};

ActionSchema parse_action(const SExpr& section, const DomainDescription& domain) {
    if (section.children.size() < 2) fail("action without a name", section);
    check_name(section.children[1], "action name");
    ActionSchema schema;
    schema.name = section.children[1].atom;
    std::vector<const SExpr*> pre_at, add_at, del_at;
    for (std::size_t i = 2; i < section.children.size(); ++i) {
        const std::string& key = expect_atom(section.children[i], "action keyword");
        if (i + 1 >= section.children.size()) fail("missing value for " + key, section.children[i]);
        const SExpr& value = section.children[++i];
        if (key == ":parameters") {
            if (!value.is_list()) fail("expected parameter list", value);
            schema.params = parse_typed_list(value.children, 0, true);
        } else if (key == ":precondition") {
            parse_condition(value, schema.preconditions, &pre_at);
        } else if (key == ":effect") {
            parse_effect(value, schema.add_effects, schema.delete_effects, add_at, del_at);
        } else {
            fail("unknown action keyword '" + key + "'", section.children[i - 1]);
        }
    }
    for (const auto& p : schema.params) {
        if (!domain.has_type(p.type)) fail("unknown type '" + p.type + "' for " + p.name, section);
    }
    const DomainChecker checker{domain};
    for (std::size_t k = 0; k < schema.preconditions.size(); ++k) {
        checker.check_atom(schema.preconditions[k], *pre_at[k], schema.params);
    }
    for (std::size_t k = 0; k < schema.add_effects.size(); ++k) {
        checker.check_atom(schema.add_effects[k], *add_at[k], schema.params);
    }
    for (std::size_t k = 0; k < schema.delete_effects.size(); ++k) {
        checker.check_atom(schema.delete_effects[k], *del_at[k], schema.params);
        if (std::find(schema.add_effects.begin(), schema.add_effects.end(),
                      schema.delete_effects[k]) != schema.add_effects.end()) {
            fail("atom '" + schema.delete_effects[k].predicate +
                     "' is both added and deleted by action '" + schema.name + "'",
                 *del_at[k]);
        }
    }
    return schema;
}

std::string header_name(const SExpr& header, std::string_view keyword) {
    if (!header.head_is(keyword) || header.children.size() != 2) {
        fail("expected (" + std::string(keyword) + " <name>)", header);
    }
    return expect_atom(header.children[1], "name");
}

void write_typed_list(std::ostream& os, const std::vector<TypedName>& items) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) os << ' ';
        os << items[i].name;
        const bool last_of_group = i + 1 == items.size() || items[i + 1].type != items[i].type;
        if (last_of_group) os << " - " << items[i].type;
    }
}

void write_atom(std::ostream& os, const Atom& atom) {
    os << '(' << atom.predicate;
    for (const auto& a : atom.args) os << ' ' << a;
    os << ')';
}

void write_conjunction(std::ostream& os, const std::vector<Atom>& atoms,
                       const std::vector<Atom>* negated = nullptr) {
    os << "(and";
    for (const auto& a : atoms) {
        os << ' ';
        write_atom(os, a);
    }
    if (negated) {
        for (const auto& a : *negated) {
            os << " (not ";
            write_atom(os, a);
            os << ')';
        }
    }
    os << ')';
}

} // namespace

std::string canonical_name(std::string_view head, std::span<const std::string> args) {
    std::string out(head);
    for (const auto& a : args) {
        out.push_back(kSeparator);
        out += a;
    }
    return out;
}

const PredicateDecl* DomainDescription::find_predicate(std::string_view name) const {
    auto it = std::find_if(predicates.begin(), predicates.end(),
                           [&](const PredicateDecl& p) { return p.name == name; });
    return it == predicates.end() ? nullptr : &*it;
}

bool DomainDescription::has_type(std::string_view type) const {
    if (type == "object") return true;
    return std::any_of(types.begin(), types.end(), [&](const TypedName& t) { return t.name == type; });
}

bool DomainDescription::is_subtype(std::string_view type, std::string_view ancestor) const {
    if (ancestor == "object") return true;
    std::string_view current = type;
    // Bounded walk so that a cyclic hierarchy cannot loop forever.
    for (std::size_t steps = 0; steps <= types.size() + 1; ++steps) {
        if (current == ancestor) return true;
        auto it = std::find_if(types.begin(), types.end(),
                               [&](const TypedName& t) { return t.name == current; });
        if (it == types.end() || it->type == current) return false;
        current = it->type;
    }
    return false;
}

DomainDescription parse_domain(std::string_view text) {
    const SExpr root = parse_document(text);
    if (root.children.size() < 2) fail("missing (domain <name>)", root);
    DomainDescription domain;
    domain.name = header_name(root.children[1], "domain");
    for (std::size_t i = 2; i < root.children.size(); ++i) {
        const SExpr& section = root.children[i];
        if (!section.is_list() || section.children.empty()) fail("expected domain section", section);
        const std::string& key = expect_atom(section.children[0], "section keyword");
        if (key == ":requirements") {
            domain.requirements = parse_requirements(section);
        } else if (key == ":types") {
            domain.types = parse_typed_list(section.children, 1, false);
            for (const auto& t : domain.types) {
                if (t.name == "object") fail("'object' cannot be redeclared", section);
            }
            for (const auto& t : domain.types) {
                if (!domain.has_type(t.type)) fail("undeclared parent type '" + t.type + "'", section);
            }
        } else if (key == ":constants") {
            domain.constants = parse_typed_list(section.children, 1, false);
            for (const auto& c : domain.constants) {
                if (!domain.has_type(c.type)) fail("unknown type '" + c.type + "'", section);
            }
        } else if (key == ":predicates") {
            for (std::size_t k = 1; k < section.children.size(); ++k) {
                const SExpr& decl = section.children[k];
                if (!decl.is_list() || decl.children.empty()) fail("expected predicate declaration", decl);
                check_name(decl.children[0], "predicate name");
                PredicateDecl p{decl.children[0].atom, parse_typed_list(decl.children, 1, true)};
                for (const auto& param : p.params) {
                    if (!domain.has_type(param.type)) fail("unknown type '" + param.type + "'", decl);
                }
                if (domain.find_predicate(p.name)) fail("duplicate predicate '" + p.name + "'", decl);
                domain.predicates.push_back(std::move(p));
            }
        } else if (key == ":action") {
            ActionSchema schema = parse_action(section, domain);
            for (const auto& existing : domain.schemas) {
                if (existing.name == schema.name) fail("duplicate action '" + schema.name + "'", section);
            }
            domain.schemas.push_back(std::move(schema));
        } else if (key == ":functions") {
            throw UnsupportedError("numeric-fluents", "numeric fluents (:functions) are not supported");
        } else if (key == ":durative-action") {
            throw UnsupportedError("durative-actions", "durative actions are not supported");
        } else if (key == ":derived") {
            throw UnsupportedError("derived-predicates", "derived predicates are not supported");
        } else {
            fail("unknown domain section '" + key + "'", section);
        }
    }
    return domain;
}

ProblemDescription parse_problem_description(std::string_view text) {
    const SExpr root = parse_document(text);
    if (root.children.size() < 2) fail("missing (problem <name>)", root);
    ProblemDescription problem;
    problem.name = header_name(root.children[1], "problem");
    for (std::size_t i = 2; i < root.children.size(); ++i) {
        const SExpr& section = root.children[i];
        if (!section.is_list() || section.children.empty()) fail("expected problem section", section);
        const std::string& key = expect_atom(section.children[0], "section keyword");
        if (key == ":domain") {
            if (section.children.size() != 2) fail("expected (:domain <name>)", section);
            problem.domain_name = expect_atom(section.children[1], "domain name");
        } else if (key == ":requirements") {
            parse_requirements(section);
        } else if (key == ":objects") {
            problem.objects = parse_typed_list(section.children, 1, false);
        } else if (key == ":init") {
            for (std::size_t k = 1; k < section.children.size(); ++k) {
                const SExpr& e = section.children[k];
                Atom atom = parse_atom(e);
                for (const auto& a : atom.args) {
                    if (a[0] == '?') fail("variables are not allowed in :init", e);
                }
                problem.init.push_back(std::move(atom));
            }
        } else if (key == ":goal") {
            if (section.children.size() != 2) fail("expected a single goal condition", section);
            parse_condition(section.children[1], problem.goal, nullptr);
            for (const auto& atom : problem.goal) {
                for (const auto& a : atom.args) {
                    if (a[0] == '?') fail("variables are not allowed in :goal", section);
                }
            }
        } else if (key == ":metric") {
            throw UnsupportedError("numeric-fluents", ":metric is not supported");
        } else {
            fail("unknown problem section '" + key + "'", section);
        }
    }
    return problem;
}

std::string to_pddl(const DomainDescription& domain) {
    std::ostringstream os;
    os << "(define (domain " << domain.name << ")\n";
    if (!domain.requirements.empty()) {
        os << "  (:requirements";
        for (const auto& r : domain.requirements) os << ' ' << r;
        os << ")\n";
    }
    if (!domain.types.empty()) {
        os << "  (:types ";
        write_typed_list(os, domain.types);
        os << ")\n";
    }
    if (!domain.constants.empty()) {
        os << "  (:constants ";
        write_typed_list(os, domain.constants);
        os << ")\n";
    }
    os << "  (:predicates";
    for (const auto& p : domain.predicates) {
        os << "\n    (" << p.name;
        if (!p.params.empty()) os << ' ';
        write_typed_list(os, p.params);
        os << ')';
    }
    os << ")\n";
    for (const auto& s : domain.schemas) {
        os << "  (:action " << s.name << "\n    :parameters (";
        write_typed_list(os, s.params);
        os << ")\n    :precondition ";
        write_conjunction(os, s.preconditions);
        os << "\n    :effect ";
        write_conjunction(os, s.add_effects, &s.delete_effects);
        os << ")\n";
    }
    os << ")\n";
    return os.str();
}

std::string to_pddl(const ProblemDescription& problem) {
    std::ostringstream os;
    os << "(define (problem " << problem.name << ")\n";
    os << "  (:domain " << problem.domain_name << ")\n";
    os << "  (:objects ";
    write_typed_list(os, problem.objects);
    os << ")\n  (:init";
    for (const auto& a : problem.init) {
        os << "\n    ";
        write_atom(os, a);
    }
    os << ")\n  (:goal ";
    write_conjunction(os, problem.goal);
    os << "))\n";
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io_error", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace stripsviz
