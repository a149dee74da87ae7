#include "bun/predicate.hpp"

#include <algorithm>
#include <functional>

namespace bun {

const char* to_string(EntityNs ns) {
    switch (ns) {
        case EntityNs::Subject: return "subject";
        case EntityNs::Object: return "object";
        case EntityNs::Op: return "op";
        case EntityNs::Context: return "context";
    }
    return "?";
}

namespace {

std::optional<CmpOp> cmp_from(std::string_view w) {
    if (w == "=") return CmpOp::Eq;
    if (w == "!=") return CmpOp::Ne;
    if (w == "<") return CmpOp::Lt;
    if (w == "<=") return CmpOp::Le;
    if (w == ">") return CmpOp::Gt;
    if (w == ">=") return CmpOp::Ge;
    return std::nullopt;
}

EntityNs ns_of_path(TokenStream& ts, const Token& tok, std::string_view path) {
    auto dot = path.find('.');
    std::string_view head = dot == std::string_view::npos ? path : path.substr(0, dot);
    if (head == "subject") return EntityNs::Subject;
    if (head == "object") return EntityNs::Object;
    if (head == "op") return EntityNs::Op;
    if (head == "context") return EntityNs::Context;
    ts.fail_at(tok, "path must start with subject/object/op/context: '" + std::string(path) + "'");
}

std::string expect_path(TokenStream& ts, EntityNs* ns_out) {
    Token tok = ts.peek();
    std::string path = ts.expect_word("attribute path");
    auto dot = path.find('.');
    if (dot == std::string::npos || dot + 1 >= path.size())
        ts.fail_at(tok, "path must name a field, e.g. object.state.temperature");
    *ns_out = ns_of_path(ts, tok, path);
    return path;
}

std::string expect_name_arg(TokenStream& ts) {
    Token tok = ts.peek();
    if (tok.type == Token::Type::String) {
        ts.next();
        return tok.text;
    }
    return ts.expect_word("name");
}

PredicatePtr parse_expr(TokenStream& ts) {
    auto node = std::make_shared<PredicateExpr>();
    ts.expect_punct("(");
    Token head_tok = ts.peek();
    std::string head = ts.expect_word("operator or atom name");
    using K = PredicateExpr::Kind;
    if (head == "and" || head == "or") {
        node->kind = head == "and" ? K::And : K::Or;
        while (!ts.accept_punct(")")) node->children.push_back(parse_expr(ts));
        return node;
    }
    if (head == "not") {
        node->kind = K::Not;
        node->children.push_back(parse_expr(ts));
        ts.expect_punct(")");
        return node;
    }
    if (auto op = cmp_from(head)) {
        node->kind = K::Cmp;
        node->cmp = *op;
        node->path = expect_path(ts, &node->entity);
        node->value = parse_literal(ts);
        ts.expect_punct(")");
        return node;
    }
    if (head == "in") {
        node->kind = K::In;
        node->path = expect_path(ts, &node->entity);
        while (!ts.accept_punct(")")) node->values.push_back(parse_literal(ts));
        if (node->values.empty()) ts.fail_at(head_tok, "'in' needs at least one literal");
        return node;
    }
    if (head == "exists") {
        node->kind = K::Exists;
        node->path = expect_path(ts, &node->entity);
        ts.expect_punct(")");
        return node;
    }
    if (head == "has_role" || head == "has_capability") {
        node->kind = head == "has_role" ? K::HasRole : K::HasCapability;
        Token ent = ts.peek();
        if (ts.expect_word("entity") != "subject")
            ts.fail_at(ent, head + " applies to 'subject'");
        node->entity = EntityNs::Subject;
        node->name = expect_name_arg(ts);
        ts.expect_punct(")");
        return node;
    }
    if (head == "has_tag") {
        node->kind = K::HasTag;
        Token ent = ts.peek();
        std::string which = ts.expect_word("entity");
        if (which == "object") node->entity = EntityNs::Object;
        else if (which == "context") node->entity = EntityNs::Context;
        else ts.fail_at(ent, "has_tag applies to 'object' or 'context'");
        node->name = expect_name_arg(ts);
        ts.expect_punct(")");
        return node;
    }
    if (head == "affords") {
        node->kind = K::Affords;
        Token ent = ts.peek();
        if (ts.expect_word("entity") != "object")
            ts.fail_at(ent, "affords applies to 'object'");
        node->entity = EntityNs::Object;
        node->name = expect_name_arg(ts);
        ts.expect_punct(")");
        return node;
    }
    ts.fail_at(head_tok, "unknown atom or connective '" + head + "'");
}

std::string name_arg_text(const std::string& name) {
    return is_valid_id(name) ? name : quote_string(name);
}

void print_into(const PredicateExpr& e, std::string& out) {
    using K = PredicateExpr::Kind;
    switch (e.kind) {
        case K::And:
        case K::Or:
        case K::Not: {
            out += "(";
            out += e.kind == K::And ? "and" : (e.kind == K::Or ? "or" : "not");
            for (const auto& c : e.children) {
                out += " ";
                print_into(*c, out);
            }
            out += ")";
            return;
        }
        case K::Cmp:
            out += "(" + std::string(to_string(e.cmp)) + " " + e.path + " " + e.value.str() + ")";
            return;
        case K::In: {
            out += "(in " + e.path;
            for (const auto& v : e.values) out += " " + v.str();
            out += ")";
            return;
        }
        case K::Exists:
            out += "(exists " + e.path + ")";
            return;
        case K::HasRole:
            out += "(has_role subject " + name_arg_text(e.name) + ")";
            return;
        case K::HasCapability:
            out += "(has_capability subject " + name_arg_text(e.name) + ")";
            return;
        case K::HasTag:
            out += std::string("(has_tag ") + to_string(e.entity) + " " + name_arg_text(e.name) + ")";
            return;
        case K::Affords:
            out += "(affords object " + name_arg_text(e.name) + ")";
            return;
    }
}

}  // namespace

PredicatePtr parse_predicate(std::string_view text, const std::string& origin) {
    TokenStream ts(text, origin);
    PredicatePtr e = parse_expr(ts);
    if (!ts.at_end()) ts.fail("trailing input after predicate");
    return e;
}

PredicatePtr parse_predicate(TokenStream& ts) { return parse_expr(ts); }

std::string print_predicate(const PredicateExpr& e) {
    std::string out;
    print_into(e, out);
    return out;
}

std::string print_predicate(const PredicatePtr& e) {
    return e ? print_predicate(*e) : std::string("(and)");
}

bool same_structure(const PredicateExpr& a, const PredicateExpr& b) {
    if (a.kind != b.kind || a.entity != b.entity || a.path != b.path || a.name != b.name)
        return false;
    if (a.kind == PredicateExpr::Kind::Cmp && (a.cmp != b.cmp || !(a.value == b.value)))
        return false;
    if (a.values.size() != b.values.size() || a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        if (!(a.values[i] == b.values[i])) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!same_structure(*a.children[i], *b.children[i])) return false;
    return true;
}

PredicatePtr make_true() {
    auto e = std::make_shared<PredicateExpr>();
    e->kind = PredicateExpr::Kind::And;
    return e;
}

std::optional<Literal> BindingEnv::lookup(std::string_view path) const {
    auto dot = path.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    std::string_view head = path.substr(0, dot);
    std::string_view rest = path.substr(dot + 1);
    auto in_map = [](const AttrMap& m, std::string_view key) -> std::optional<Literal> {
        auto it = m.find(std::string(key));
        if (it == m.end()) return std::nullopt;
        return it->second;
    };
    if (head == "subject") {
        if (!subject) return std::nullopt;
        if (rest == "id") return Literal::of_string(subject->id);
        if (rest.rfind("attributes.", 0) == 0) return in_map(subject->attributes, rest.substr(11));
        return std::nullopt;
    }
    if (head == "object") {
        if (!object) return std::nullopt;
        if (rest == "id") return Literal::of_string(object->id);
        if (rest == "class") return Literal::of_string(object->object_class);
        if (rest.rfind("attributes.", 0) == 0) return in_map(object->attributes, rest.substr(11));
        if (rest.rfind("state.", 0) == 0) return in_map(object->state, rest.substr(6));
        return std::nullopt;
    }
    if (head == "op") {
        if (rest == "name") return Literal::of_string(op.name);
        if (rest.rfind("args.", 0) == 0) return in_map(op.args, rest.substr(5));
        return std::nullopt;
    }
    if (head == "context") return in_map(context.values, rest);
    return std::nullopt;
}

bool eval_atom(const PredicateExpr& atom, const BindingEnv& env) {
    using K = PredicateExpr::Kind;
    switch (atom.kind) {
        case K::Cmp: {
            auto v = env.lookup(atom.path);
            if (!v) return false;
            if (atom.cmp == CmpOp::Eq || atom.cmp == CmpOp::Ne) {
                auto eq = v->equals(atom.value);
                if (!eq) return false;
                return atom.cmp == CmpOp::Eq ? *eq : !*eq;
            }
            auto ord = v->order(atom.value);
            if (!ord) return false;
            return cmp_holds(*ord, atom.cmp);
        }
        case K::In: {
            auto v = env.lookup(atom.path);
            if (!v) return false;
            for (const auto& cand : atom.values) {
                auto eq = v->equals(cand);
                if (eq && *eq) return true;
            }
            return false;
        }
        case K::Exists:
            return env.lookup(atom.path).has_value();
        case K::HasRole:
            return env.subject && env.subject->roles.count(atom.name) > 0;
        case K::HasCapability:
            return env.subject && env.subject->capabilities.count(atom.name) > 0;
        case K::HasTag:
            if (atom.entity == EntityNs::Object)
                return env.object && env.object->tags.count(atom.name) > 0;
            return env.context.tags.count(atom.name) > 0;
        case K::Affords:
            return env.object && env.object->affordances.count(atom.name) > 0;
        default:
            throw Error("eval_atom called on a connective");
    }
}

namespace {

bool eval_into(const PredicateExpr& e, const BindingEnv& env, EvalResult& res) {
    using K = PredicateExpr::Kind;
    switch (e.kind) {
        case K::And: {
            bool v = true;
            for (const auto& c : e.children) v = eval_into(*c, env, res) && v;
            return v;
        }
        case K::Or: {
            bool v = false;
            for (const auto& c : e.children) v = eval_into(*c, env, res) || v;
            return v;
        }
        case K::Not:
            return !eval_into(*e.children.front(), env, res);
        default: {
            bool v = eval_atom(e, env);
            res.trace.emplace_back(print_predicate(e), v);
            return v;
        }
    }
}

void walk_atoms(const PredicateExpr& e, const std::function<void(const PredicateExpr&)>& fn) {
    if (e.is_atom()) {
        fn(e);
        return;
    }
    for (const auto& c : e.children) walk_atoms(*c, fn);
}

}  // namespace

EvalResult evaluate(const PredicateExpr& e, const BindingEnv& env) {
    EvalResult res;
    res.value = eval_into(e, env, res);
    return res;
}

std::set<EntityNs> referenced_namespaces(const PredicateExpr& e) {
    std::set<EntityNs> out;
    walk_atoms(e, [&](const PredicateExpr& atom) { out.insert(atom.entity); });
    return out;
}

std::optional<std::string> find_namespace_violation(const PredicateExpr& e,
                                                    const std::set<EntityNs>& allowed) {
    std::optional<std::string> hit;
    walk_atoms(e, [&](const PredicateExpr& atom) {
        if (!hit && allowed.count(atom.entity) == 0) hit = print_predicate(atom);
    });
    return hit;
}

std::vector<std::string> validate_predicate(const PredicateExpr& e, const AttributeCatalog& catalog) {
    std::vector<std::string> warnings;
    walk_atoms(e, [&](const PredicateExpr& atom) {
        using K = PredicateExpr::Kind;
        if (atom.kind != K::Cmp && atom.kind != K::In && atom.kind != K::Exists) return;
        auto it = catalog.paths.find(atom.path);
        if (it == catalog.paths.end()) {
            warnings.push_back("unknown path: " + atom.path);
            return;
        }
        auto coherent = [&](const Literal& lit) {
            LiteralKind have = it->second;
            LiteralKind want = lit.kind();
            bool both_num = (have == LiteralKind::Int || have == LiteralKind::Decimal) &&
                            (want == LiteralKind::Int || want == LiteralKind::Decimal);
            return both_num || have == want;
        };
        if (atom.kind == K::Cmp) {
            if (!coherent(atom.value)) {
                warnings.push_back("type-incoherent comparison: " + atom.path + " is " +
                                   to_string(it->second) + ", literal " + atom.value.str() +
                                   " is " + to_string(atom.value.kind()));
            } else if (it->second == LiteralKind::Bool && atom.cmp != CmpOp::Eq &&
                       atom.cmp != CmpOp::Ne) {
                warnings.push_back("ordering comparison on boolean path: " + atom.path);
            }
        }
        if (atom.kind == K::In) {
            for (const auto& v : atom.values) {
                if (!coherent(v))
                    warnings.push_back("type-incoherent set member for " + atom.path + ": " +
                                       v.str());
            }
        }
    });
    return warnings;
}

}  // namespace bun
