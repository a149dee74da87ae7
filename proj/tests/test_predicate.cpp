#include <doctest.h>

#include "oracles.hpp"

using namespace bun;

namespace {

BindingEnv demo_env(const SubjectRecord& s, const ObjectRecord& o) {
    BindingEnv env;
    env.subject = &s;
    env.object = &o;
    env.op.name = "update_value";
    env.context.values["logical_time"] = Literal::of_int(7);
    env.context.tags = {"regionA"};
    return env;
}

}  // namespace

TEST_CASE("parsing atoms and connectives") {
    auto cmp = parse_predicate("(> object.state.temperature 80)");
    CHECK(cmp->kind == PredicateExpr::Kind::Cmp);
    CHECK(cmp->cmp == CmpOp::Gt);
    CHECK(cmp->path == "object.state.temperature");
    CHECK(cmp->entity == EntityNs::Object);

    auto top = parse_predicate(
        "(and (has_role subject operator) (> object.state.temperature 80))");
    CHECK(top->kind == PredicateExpr::Kind::And);
    CHECK(top->children.size() == 2);

    // empty conjunction is the constant-true expression
    auto t = parse_predicate("(and)");
    BindingEnv empty;
    CHECK(evaluate(*t, empty).value);
    CHECK(!evaluate(*parse_predicate("(or)"), empty).value);

    auto in = parse_predicate("(in subject.attributes.dept \"eng\" \"ops\")");
    CHECK(in->values.size() == 2);
}

TEST_CASE("parse errors carry position and name the problem") {
    CHECK_THROWS_WITH_AS(parse_predicate("(frobnicate subject x)", "rule"),
                         doctest::Contains("unknown atom"), Error);
    CHECK_THROWS_AS(parse_predicate("(> object.state.temperature)"), Error);
    CHECK_THROWS_AS(parse_predicate("(in object.state.x)"), Error);       // empty literal set
    CHECK_THROWS_AS(parse_predicate("(has_role object admin)"), Error);   // wrong entity
    CHECK_THROWS_AS(parse_predicate("(> badpath 5)"), Error);             // no namespace
    CHECK_THROWS_AS(parse_predicate("(and (or)"), Error);                 // unbalanced
    try {
        parse_predicate("(and\n  (oops subject.x 1))", "f");
        FAIL("expected a parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("f:2:") != std::string::npos);
    }
}

TEST_CASE("evaluator matches the paper-style examples") {
    SubjectRecord s;
    s.id = "user1";
    s.roles = {"operator"};
    ObjectRecord o;
    o.id = "transformer1";
    o.object_class = "Transformer";
    o.state["temperature"] = Literal::of_int(85);
    auto env = demo_env(s, o);

    CHECK(evaluate(*parse_predicate("(has_role subject operator)"), env).value);
    CHECK(evaluate(*parse_predicate("(> object.state.temperature 80)"), env).value);
    CHECK(!evaluate(*parse_predicate("(> object.state.temperature 90)"), env).value);
    CHECK(evaluate(*parse_predicate("(has_tag context regionA)"), env).value);
    CHECK(!evaluate(*parse_predicate("(has_tag object regionA)"), env).value);
}

TEST_CASE("missing paths and incompatible comparisons evaluate false, never throw") {
    SubjectRecord s;
    s.id = "s";
    ObjectRecord o;
    o.id = "o";
    o.object_class = "Crate";
    o.state["name"] = Literal::of_string("box");
    auto env = demo_env(s, o);

    CHECK(!evaluate(*parse_predicate("(> object.state.missing 5)"), env).value);
    CHECK(!evaluate(*parse_predicate("(exists object.state.missing)"), env).value);
    CHECK(evaluate(*parse_predicate("(exists object.state.name)"), env).value);
    CHECK(!evaluate(*parse_predicate("(> object.state.name 5)"), env).value);   // string vs int
    CHECK(!evaluate(*parse_predicate("(= object.state.name 5)"), env).value);
    CHECK(!evaluate(*parse_predicate("(!= object.state.name 5)"), env).value);  // still false
    // negation over a missing path is true: the atom itself is false
    CHECK(evaluate(*parse_predicate("(not (exists object.state.missing))"), env).value);
}

TEST_CASE("trace lists every atom with no short-circuit omission") {
    SubjectRecord s;
    s.id = "s";
    s.roles = {"a"};
    ObjectRecord o;
    o.id = "o";
    o.object_class = "Crate";
    auto env = demo_env(s, o);
    auto e = parse_predicate(
        "(or (has_role subject a) (has_role subject b) (and (has_role subject c)))");
    EvalResult r = evaluate(*e, env);
    CHECK(r.value);
    REQUIRE(r.trace.size() == 3);  // all three atoms visited despite the early true
    CHECK(r.trace[0].second);
    CHECK(!r.trace[1].second);
    CHECK(!r.trace[2].second);
}

TEST_CASE("print/parse round trip is the identity on random ASTs") {
    oracle::Gen gen(1234);
    for (int i = 0; i < 1000; ++i) {
        PredicatePtr e = gen.predicate(3);
        std::string printed = print_predicate(e);
        PredicatePtr back = parse_predicate(printed);
        CHECK(same_structure(*e, *back));
        CHECK(print_predicate(back) == printed);
    }
}

TEST_CASE("evaluator agrees with the brute-force oracle on random inputs") {
    oracle::Gen gen(4321);
    for (int i = 0; i < 1500; ++i) {
        PredicatePtr e = gen.predicate(3);
        SubjectRecord s = gen.subject("s1");
        ObjectRecord o = gen.object("o1");
        BindingEnv env;
        env.subject = &s;
        env.object = &o;
        env.op.name = "op1";
        env.op.args["amount"] = gen.literal();
        env.context.values["logical_time"] = Literal::of_int(gen.pick(40));
        if (gen.coin()) env.context.values["mode"] = gen.literal();
        if (gen.coin()) env.context.tags.insert(gen.safe_word());
        CHECK(evaluate(*e, env).value == oracle::o_eval(*e, env));
    }
}

TEST_CASE("monotone conjunction: and(a,b) == a && b") {
    oracle::Gen gen(999);
    for (int i = 0; i < 400; ++i) {
        PredicatePtr a = gen.predicate(2);
        PredicatePtr b = gen.predicate(2);
        auto both = std::make_shared<PredicateExpr>();
        both->kind = PredicateExpr::Kind::And;
        both->children = {a, b};
        SubjectRecord s = gen.subject("s1");
        ObjectRecord o = gen.object("o1");
        BindingEnv env;
        env.subject = &s;
        env.object = &o;
        env.op.name = "op0";
        env.context.values["logical_time"] = Literal::of_int(3);
        CHECK(evaluate(*both, env).value ==
              (evaluate(*a, env).value && evaluate(*b, env).value));
    }
}

TEST_CASE("missing-path soundness: unbound env behaves as all-atoms-false") {
    oracle::Gen gen(31);
    BindingEnv bare;  // nothing bound at all; only op.name would still resolve
    std::function<bool(const PredicateExpr&)> touches_op_name =
        [&](const PredicateExpr& n) -> bool {
        if (n.is_atom()) return n.path == "op.name";
        for (const auto& c : n.children)
            if (touches_op_name(*c)) return true;
        return false;
    };
    for (int i = 0; i < 400; ++i) {
        PredicatePtr e = gen.predicate(3);
        if (touches_op_name(*e)) continue;
        // fold the expression with every atom forced false
        std::function<bool(const PredicateExpr&)> fold = [&](const PredicateExpr& n) -> bool {
            using K = PredicateExpr::Kind;
            if (n.kind == K::And) {
                bool v = true;
                for (const auto& c : n.children) v = fold(*c) && v;
                return v;
            }
            if (n.kind == K::Or) {
                bool v = false;
                for (const auto& c : n.children) v = fold(*c) || v;
                return v;
            }
            if (n.kind == K::Not) return !fold(*n.children.front());
            return false;
        };
        CHECK(evaluate(*e, bare).value == fold(*e));
    }
}

TEST_CASE("determinism: identical evaluation twice gives identical traces") {
    oracle::Gen gen(77);
    PredicatePtr e = gen.predicate(4);
    SubjectRecord s = gen.subject("s1");
    ObjectRecord o = gen.object("o1");
    BindingEnv env;
    env.subject = &s;
    env.object = &o;
    EvalResult a = evaluate(*e, env);
    EvalResult b = evaluate(*e, env);
    CHECK(a.value == b.value);
    CHECK(a.trace == b.trace);
}

TEST_CASE("namespace analysis finds the first offending atom") {
    auto e = parse_predicate("(and (has_role subject x) (> object.state.y 3))");
    auto ns = referenced_namespaces(*e);
    CHECK(ns == std::set<EntityNs>{EntityNs::Subject, EntityNs::Object});
    auto hit = find_namespace_violation(*e, {EntityNs::Subject});
    REQUIRE(hit.has_value());
    CHECK(*hit == "(> object.state.y 3)");
    CHECK(!find_namespace_violation(*e, {EntityNs::Subject, EntityNs::Object}));
}

TEST_CASE("validator warns without rejecting") {
    AttributeCatalog cat;
    cat.paths["object.state.name"] = LiteralKind::String;
    cat.paths["object.state.temperature"] = LiteralKind::Int;
    cat.paths["subject.attributes.level"] = LiteralKind::Int;

    auto unknown = validate_predicate(*parse_predicate("(> subject.attributes.age 3)"), cat);
    REQUIRE(unknown.size() == 1);
    CHECK(unknown[0].find("unknown path") != std::string::npos);

    auto clash = validate_predicate(*parse_predicate("(> object.state.name 5)"), cat);
    REQUIRE(clash.size() == 1);
    CHECK(clash[0].find("type-incoherent") != std::string::npos);

    auto clean = validate_predicate(
        *parse_predicate("(and (> object.state.temperature 80) (>= subject.attributes.level 2))"),
        cat);
    CHECK(clean.empty());
}
