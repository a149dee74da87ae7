// Independent oracles and generators shared by the unit and acceptance
// suites. Everything here re-derives expected values from first principles
// and must stay independent of the implementation paths it checks.
#pragma once

#include <functional>
#include <random>

#include "bun/exports.hpp"

namespace oracle {

using namespace bun;

// ---- independent predicate evaluator -------------------------------------
//
// Materializes every atom's value with its own atom semantics, then folds
// the connectives. Shares nothing with bun::evaluate.

inline std::optional<Literal> o_lookup(const BindingEnv& env, const std::string& path) {
    auto dot = path.find('.');
    if (dot == std::string::npos) return std::nullopt;
    std::string head = path.substr(0, dot);
    std::string rest = path.substr(dot + 1);
    const AttrMap* map = nullptr;
    std::string key;
    if (head == "subject" && env.subject) {
        if (rest == "id") return Literal::of_string(env.subject->id);
        if (rest.rfind("attributes.", 0) == 0) {
            map = &env.subject->attributes;
            key = rest.substr(11);
        }
    } else if (head == "object" && env.object) {
        if (rest == "id") return Literal::of_string(env.object->id);
        if (rest == "class") return Literal::of_string(env.object->object_class);
        if (rest.rfind("attributes.", 0) == 0) {
            map = &env.object->attributes;
            key = rest.substr(11);
        } else if (rest.rfind("state.", 0) == 0) {
            map = &env.object->state;
            key = rest.substr(6);
        }
    } else if (head == "op") {
        if (rest == "name") return Literal::of_string(env.op.name);
        if (rest.rfind("args.", 0) == 0) {
            map = &env.op.args;
            key = rest.substr(5);
        }
    } else if (head == "context") {
        map = &env.context.values;
        key = rest;
    }
    if (!map) return std::nullopt;
    auto it = map->find(key);
    if (it == map->end()) return std::nullopt;
    return it->second;
}

inline bool o_atom(const PredicateExpr& a, const BindingEnv& env) {
    using K = PredicateExpr::Kind;
    switch (a.kind) {
        case K::Cmp: {
            auto v = o_lookup(env, a.path);
            if (!v) return false;
            if (a.cmp == CmpOp::Eq || a.cmp == CmpOp::Ne) {
                auto eq = v->equals(a.value);
                return eq ? (a.cmp == CmpOp::Eq ? *eq : !*eq) : false;
            }
            auto ord = v->order(a.value);
            return ord ? cmp_holds(*ord, a.cmp) : false;
        }
        case K::In: {
            auto v = o_lookup(env, a.path);
            if (!v) return false;
            for (const auto& cand : a.values) {
                auto eq = v->equals(cand);
                if (eq && *eq) return true;
            }
            return false;
        }
        case K::Exists:
            return o_lookup(env, a.path).has_value();
        case K::HasRole:
            return env.subject && env.subject->roles.count(a.name);
        case K::HasCapability:
            return env.subject && env.subject->capabilities.count(a.name);
        case K::HasTag:
            return a.entity == EntityNs::Object ? (env.object && env.object->tags.count(a.name))
                                                : env.context.tags.count(a.name) > 0;
        case K::Affords:
            return env.object && env.object->affordances.count(a.name);
        default:
            return false;
    }
}

inline bool o_eval(const PredicateExpr& e, const BindingEnv& env) {
    using K = PredicateExpr::Kind;
    if (e.kind == K::And) {
        bool v = true;
        for (const auto& c : e.children) v = o_eval(*c, env) && v;
        return v;
    }
    if (e.kind == K::Or) {
        bool v = false;
        for (const auto& c : e.children) v = o_eval(*c, env) || v;
        return v;
    }
    if (e.kind == K::Not) return !o_eval(*e.children.front(), env);
    return o_atom(e, env);
}

// ---- unindexed validity oracle --------------------------------------------
//
// Gate + plain scan over every rule, evaluating scope match and all three
// predicates with the independent evaluator.

inline bool o_check_validity(const SubjectRecord& subject, const ObjectRecord& object,
                             const std::string& operation, const AttrMap& args,
                             const ContextInfo& context,
                             const std::vector<ValidityRule>& rules) {
    if (!object.affordances.count(operation)) return false;
    if (!subject.capabilities.count(operation)) return false;
    BindingEnv env;
    env.subject = &subject;
    env.object = &object;
    env.op = {operation, args};
    env.context = context;
    for (const auto& rule : rules) {
        bool in_scope = (rule.op_pattern == "*" || rule.op_pattern == operation) &&
                        (rule.class_pattern == "*" || rule.class_pattern == object.object_class);
        if (!in_scope) continue;
        if (!o_eval(*rule.subject_pred, env)) return false;
        if (!o_eval(*rule.object_pred, env)) return false;
        if (!o_eval(*rule.op_context_pred, env)) return false;
    }
    return true;
}

// ---- exhaustive bigram oracle ----------------------------------------------
//
// Window counting done the long way, with the same start-marker padding
// convention the model documents.

inline std::map<ActionKey, double> o_bigram_distribution(
    const std::vector<std::vector<ActionKey>>& sequences, const std::vector<ActionKey>& history,
    int n) {
    std::map<std::vector<ActionKey>, std::map<ActionKey, std::int64_t>> counts;
    std::set<ActionKey> vocab;
    for (const auto& seq : sequences) {
        for (std::size_t i = 0; i < seq.size(); ++i) {
            std::vector<ActionKey> ctx;
            for (int k = n - 1; k >= 1; --k) {
                std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(i) - k;
                ctx.push_back(idx < 0 ? start_marker() : seq[static_cast<std::size_t>(idx)]);
            }
            ++counts[ctx][seq[i]];
            vocab.insert(seq[i]);
        }
    }
    std::vector<ActionKey> ctx;
    for (int k = n - 1; k >= 1; --k) {
        std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(history.size()) - k;
        ctx.push_back(idx < 0 ? start_marker() : history[static_cast<std::size_t>(idx)]);
    }
    std::map<ActionKey, double> dist;
    auto it = counts.find(ctx);
    if (it == counts.end()) {
        if (vocab.empty()) return dist;
        for (const auto& key : vocab) dist[key] = 1.0 / static_cast<double>(vocab.size());
        return dist;
    }
    std::int64_t total = 0;
    for (const auto& [key, c] : it->second) total += c;
    for (const auto& [key, c] : it->second)
        dist[key] = static_cast<double>(c) / static_cast<double>(total);
    return dist;
}

// ---- random generators -----------------------------------------------------

struct Gen {
    std::mt19937_64 rng;
    explicit Gen(std::uint64_t seed) : rng(seed) {}

    std::int64_t pick(std::int64_t n) { return static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(n)); }
    bool coin() { return (rng() & 1) != 0; }

    std::string name(const char* prefix) { return std::string(prefix) + std::to_string(pick(6)); }

    std::string safe_word() {
        static const char* words[] = {"alpha", "beta", "gamma", "delta", "omega", "zone"};
        return words[pick(6)];
    }

    std::string wild_string() {
        std::string s;
        std::int64_t len = pick(8);
        static const char chars[] = "ab c\"\\d.(){}#9-|\t$";
        for (std::int64_t i = 0; i < len; ++i)
            s.push_back(chars[static_cast<std::size_t>(pick(sizeof(chars) - 1))]);
        return s;
    }

    Literal literal() {
        switch (pick(4)) {
            case 0: return Literal::of_string(wild_string());
            case 1: return Literal::of_int(pick(200) - 100);
            case 2: return Literal::of_decimal(Decimal(pick(20000) - 10000, static_cast<std::int32_t>(pick(4))));
            default: return Literal::of_bool(coin());
        }
    }

    std::string path() {
        static const char* paths[] = {
            "subject.id",          "subject.attributes.age",  "subject.attributes.dept",
            "object.id",           "object.class",            "object.state.temperature",
            "object.state.status", "object.attributes.level", "op.name",
            "op.args.amount",      "context.logical_time",    "context.mode",
        };
        return paths[pick(12)];
    }

    PredicatePtr predicate(int depth) {
        auto node = std::make_shared<PredicateExpr>();
        using K = PredicateExpr::Kind;
        if (depth > 0 && pick(3) == 0) {
            switch (pick(3)) {
                case 0: node->kind = K::And; break;
                case 1: node->kind = K::Or; break;
                default: node->kind = K::Not; break;
            }
            std::int64_t kids = node->kind == K::Not ? 1 : pick(3);
            for (std::int64_t i = 0; i < kids; ++i)
                node->children.push_back(predicate(depth - 1));
            if (node->kind == K::Not && node->children.empty())
                node->children.push_back(predicate(0));
            return node;
        }
        switch (pick(7)) {
            case 0: {
                node->kind = K::Cmp;
                node->cmp = static_cast<CmpOp>(pick(6));
                node->path = path();
                node->value = literal();
                break;
            }
            case 1: {
                node->kind = K::In;
                node->path = path();
                std::int64_t n = 1 + pick(3);
                for (std::int64_t i = 0; i < n; ++i) node->values.push_back(literal());
                break;
            }
            case 2:
                node->kind = K::HasRole;
                node->name = safe_word();
                break;
            case 3:
                node->kind = K::HasCapability;
                node->name = safe_word();
                break;
            case 4:
                node->kind = K::HasTag;
                node->entity = coin() ? EntityNs::Object : EntityNs::Context;
                node->name = safe_word();
                break;
            case 5:
                node->kind = K::Affords;
                node->name = safe_word();
                break;
            default:
                node->kind = K::Exists;
                node->path = path();
                break;
        }
        if (node->kind == K::Cmp || node->kind == K::In || node->kind == K::Exists) {
            auto dot = node->path.find('.');
            std::string head = node->path.substr(0, dot);
            node->entity = head == "subject" ? EntityNs::Subject
                           : head == "object" ? EntityNs::Object
                           : head == "op"     ? EntityNs::Op
                                              : EntityNs::Context;
        } else if (node->kind == K::HasRole || node->kind == K::HasCapability) {
            node->entity = EntityNs::Subject;
        } else if (node->kind == K::Affords) {
            node->entity = EntityNs::Object;
        }
        return node;
    }

    // atoms restricted to one namespace, for rule generation
    PredicatePtr scoped_predicate(EntityNs ns, int atoms) {
        auto root = std::make_shared<PredicateExpr>();
        root->kind = coin() ? PredicateExpr::Kind::And : PredicateExpr::Kind::Or;
        if (root->kind == PredicateExpr::Kind::Or && atoms == 0) atoms = 1;
        for (int i = 0; i < atoms; ++i) {
            auto atom = std::make_shared<PredicateExpr>();
            using K = PredicateExpr::Kind;
            atom->entity = ns;
            switch (ns) {
                case EntityNs::Subject: {
                    switch (pick(3)) {
                        case 0:
                            atom->kind = K::HasRole;
                            atom->name = safe_word();
                            break;
                        case 1:
                            atom->kind = K::HasCapability;
                            atom->name = safe_word();
                            break;
                        default:
                            atom->kind = K::Cmp;
                            atom->cmp = static_cast<CmpOp>(pick(6));
                            atom->path = "subject.attributes." + safe_word();
                            atom->value = literal();
                            break;
                    }
                    break;
                }
                case EntityNs::Object: {
                    switch (pick(3)) {
                        case 0:
                            atom->kind = K::HasTag;
                            atom->name = safe_word();
                            break;
                        case 1:
                            atom->kind = K::Affords;
                            atom->name = safe_word();
                            break;
                        default:
                            atom->kind = K::Cmp;
                            atom->cmp = static_cast<CmpOp>(pick(6));
                            atom->path = coin() ? "object.state." + safe_word()
                                                : "object.attributes." + safe_word();
                            atom->value = literal();
                            break;
                    }
                    break;
                }
                default: {
                    if (coin()) {
                        atom->kind = K::Cmp;
                        atom->cmp = static_cast<CmpOp>(pick(6));
                        atom->path = coin() ? "context.logical_time" : "op.args." + safe_word();
                        atom->entity = atom->path[0] == 'c' ? EntityNs::Context : EntityNs::Op;
                        atom->value = coin() ? Literal::of_int(pick(20)) : literal();
                    } else {
                        atom->kind = K::HasTag;
                        atom->entity = EntityNs::Context;
                        atom->name = safe_word();
                    }
                    break;
                }
            }
            root->children.push_back(atom);
        }
        return root;
    }

    SubjectRecord subject(const std::string& id) {
        SubjectRecord s;
        s.id = id;
        std::int64_t nr = pick(3);
        for (std::int64_t i = 0; i < nr; ++i) s.roles.insert(safe_word());
        std::int64_t nc = pick(4);
        for (std::int64_t i = 0; i < nc; ++i) s.capabilities.insert("op" + std::to_string(pick(4)));
        std::int64_t na = pick(3);
        for (std::int64_t i = 0; i < na; ++i) s.attributes[safe_word()] = literal();
        return s;
    }

    ObjectRecord object(const std::string& id) {
        ObjectRecord o;
        o.id = id;
        o.object_class = coin() ? "Crate" : "Shelf";
        std::int64_t na = pick(3);
        for (std::int64_t i = 0; i < na; ++i) o.attributes[safe_word()] = literal();
        std::int64_t ns = pick(3);
        for (std::int64_t i = 0; i < ns; ++i) o.state[safe_word()] = literal();
        std::int64_t nf = pick(4);
        for (std::int64_t i = 0; i < nf; ++i) o.affordances.insert("op" + std::to_string(pick(4)));
        std::int64_t nt = pick(3);
        for (std::int64_t i = 0; i < nt; ++i) o.tags.insert(safe_word());
        return o;
    }
};

inline std::string scenario_path(const char* file) {
    return std::string(BUN_SCENARIO_DIR) + "/" + file;
}

}  // namespace oracle
