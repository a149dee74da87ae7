#include "bun/policy.hpp"

#include <algorithm>

#include "bun/store.hpp"

namespace bun {

std::string render_rule_line(const ValidityRule& r) {
    std::string out = "rule " + r.id + " scope " + r.op_pattern + " " + r.class_pattern + " p1 " +
                      print_predicate(r.subject_pred) + " p2 " + print_predicate(r.object_pred) +
                      " p3 " + print_predicate(r.op_context_pred);
    if (!r.description.empty()) out += " desc " + quote_string(r.description);
    return out;
}

ValidityRule parse_rule_line(TokenStream& ts) {
    ValidityRule r;
    if (!ts.accept_word("rule")) ts.fail("expected 'rule'");
    r.id = ts.expect_word("rule id");
    if (!ts.accept_word("scope")) ts.fail("expected 'scope'");
    r.op_pattern = ts.expect_word("operation pattern");
    r.class_pattern = ts.expect_word("class pattern");
    if (!ts.accept_word("p1")) ts.fail("expected 'p1'");
    r.subject_pred = parse_predicate(ts);
    if (!ts.accept_word("p2")) ts.fail("expected 'p2'");
    r.object_pred = parse_predicate(ts);
    if (!ts.accept_word("p3")) ts.fail("expected 'p3'");
    r.op_context_pred = parse_predicate(ts);
    if (ts.accept_word("desc")) {
        Token t = ts.next();
        if (t.type != Token::Type::String) ts.fail_at(t, "desc takes a quoted string");
        r.description = t.text;
    }
    return r;
}

bool MutexGuard::acquire(const std::string& object_id, Tick tick, BehaviorId claimant) {
    auto [it, inserted] = grants_.try_emplace({object_id, tick}, claimant);
    (void)it;
    return inserted;
}

std::optional<BehaviorId> MutexGuard::holder(const std::string& object_id, Tick tick) const {
    auto it = grants_.find({object_id, tick});
    if (it == grants_.end()) return std::nullopt;
    return it->second;
}

void register_rule(BibStore& store, ValidityRule rule) {
    if (rule.id.empty()) throw Error("rule id must be non-empty");
    if (!rule.subject_pred || !rule.object_pred || !rule.op_context_pred)
        throw Error("rule " + rule.id + " is missing a predicate");
    struct Check {
        const PredicatePtr& pred;
        std::set<EntityNs> allowed;
        const char* label;
    };
    const Check checks[] = {
        {rule.subject_pred, {EntityNs::Subject}, "p1"},
        {rule.object_pred, {EntityNs::Object}, "p2"},
        {rule.op_context_pred, {EntityNs::Op, EntityNs::Context}, "p3"},
    };
    for (const auto& c : checks) {
        if (auto atom = find_namespace_violation(*c.pred, c.allowed)) {
            throw Error("rule " + rule.id + ": " + c.label + " may not reference atom " + *atom);
        }
    }
    store.put_rule(std::move(rule));
}

Verdict check_validity_resolved(const SubjectRecord& subject, const ObjectRecord& object,
                                const std::string& operation, const AttrMap& args,
                                const ContextInfo& context,
                                const std::map<std::string, ValidityRule>& rules) {
    Verdict v;
    if (object.affordances.count(operation) == 0) {
        v.gate_passed = false;
        v.gate_reason = "gate:affordance";
        return v;
    }
    if (subject.capabilities.count(operation) == 0) {
        v.gate_passed = false;
        v.gate_reason = "gate:capability";
        return v;
    }
    v.gate_passed = true;

    BindingEnv env;
    env.subject = &subject;
    env.object = &object;
    env.op = {operation, args};
    env.context = context;

    bool all_ok = true;
    for (const auto& [id, rule] : rules) {
        if (!rule.applies_to(operation, object.object_class)) continue;
        RuleEval ev;
        ev.rule_id = id;
        EvalResult r1 = evaluate(*rule.subject_pred, env);
        EvalResult r2 = evaluate(*rule.object_pred, env);
        EvalResult r3 = evaluate(*rule.op_context_pred, env);
        ev.subject_ok = r1.value;
        ev.object_ok = r2.value;
        ev.op_context_ok = r3.value;
        v.evaluated.push_back(ev);
        if (!ev.all_ok() && all_ok) {
            all_ok = false;
            FirstFailure ff;
            ff.rule_id = id;
            const EvalResult* failing = nullptr;
            if (!r1.value) {
                ff.part = RulePart::SubjectPred;
                failing = &r1;
            } else if (!r2.value) {
                ff.part = RulePart::ObjectPred;
                failing = &r2;
            } else {
                ff.part = RulePart::OpContextPred;
                failing = &r3;
            }
            for (const auto& [atom, val] : failing->trace)
                if (!val) ff.failing_atoms.push_back(atom);
            v.first_failure = ff;
        }
    }
    v.allow = all_ok;
    return v;
}

Verdict check_validity(const BibStore& store, const CheckRequest& req) {
    const SubjectRecord* subject = store.find_subject(req.subject_id);
    if (!subject) throw Error("unresolved subject: " + req.subject_id);
    const ObjectRecord* object = store.find_object(req.object_id);
    if (!object) throw Error("unresolved object: " + req.object_id);
    return check_validity_resolved(*subject, *object, req.operation, req.args, req.context,
                                   store.rules());
}

namespace {

Tick directive_due_tick(const BehaviorRecord& request, Tick deadline_ticks) {
    return std::max(request.logical_time + deadline_ticks, request.logical_time + 1);
}

}  // namespace

bool negotiation_responded(const BehaviorRecord& request, const std::vector<BehaviorRecord>& log,
                           Tick deadline_ticks) {
    auto responder_it = request.args.find("responder");
    if (responder_it == request.args.end()) return false;
    const std::string& responder = responder_it->second.as_string();
    for (const auto& rec : log) {
        if (rec.subject_id != responder) continue;
        if (rec.logical_time >= request.logical_time + deadline_ticks) continue;
        auto reply = rec.args.find("in_reply_to");
        if (reply == rec.args.end()) continue;
        if (reply->second.kind() == LiteralKind::Int && reply->second.as_int() == request.id)
            return true;
    }
    return false;
}

std::optional<ReassignmentDirective> negotiation_timeout_check(
    const BehaviorRecord& request, const std::vector<BehaviorRecord>& log, Tick deadline_ticks,
    const std::string& fallback_subject, Tick now) {
    Tick due = directive_due_tick(request, deadline_ticks);
    if (now < due) return std::nullopt;
    if (negotiation_responded(request, log, deadline_ticks)) return std::nullopt;
    ReassignmentDirective d;
    d.request_id = request.id;
    auto responder_it = request.args.find("responder");
    if (responder_it != request.args.end() &&
        responder_it->second.kind() == LiteralKind::String)
        d.responder = responder_it->second.as_string();
    d.fallback_subject = fallback_subject;
    d.due_tick = due;
    return d;
}

}  // namespace bun
