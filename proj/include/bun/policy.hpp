#pragma once

#include "bun/predicate.hpp"

namespace bun {

class BibStore;

// One coordination rule. A behavior in scope is valid only when all three
// predicates hold: subject_pred over the subject, object_pred over the
// object, op_context_pred over the operation and context. Serialized as
//   rule <id> scope <op|*> <class|*> p1 <expr> p2 <expr> p3 <expr> [desc "..."]
struct ValidityRule {
    std::string id;
    std::string op_pattern = "*";     // exact operation name or "*"
    std::string class_pattern = "*";  // exact object class or "*"
    PredicatePtr subject_pred;        // p1
    PredicatePtr object_pred;         // p2
    PredicatePtr op_context_pred;     // p3
    std::string description;

    bool applies_to(const std::string& operation, const std::string& object_class) const {
        return (op_pattern == "*" || op_pattern == operation) &&
               (class_pattern == "*" || class_pattern == object_class);
    }
};

std::string render_rule_line(const ValidityRule& r);
ValidityRule parse_rule_line(TokenStream& ts);

struct CheckRequest {
    std::string subject_id;
    std::string operation;
    std::string object_id;
    AttrMap args;
    ContextInfo context;
};

// Per-object, per-tick write lock. First claimant wins; later claimants in
// the same tick are refused and their behaviors become mutex denials.
class MutexGuard {
public:
    bool acquire(const std::string& object_id, Tick tick, BehaviorId claimant);
    std::optional<BehaviorId> holder(const std::string& object_id, Tick tick) const;

private:
    std::map<std::pair<std::string, Tick>, BehaviorId> grants_;
};

struct ReassignmentDirective {
    BehaviorId request_id = 0;
    std::string responder;
    std::string fallback_subject;
    Tick due_tick = 0;
};

// Statically checks that p1/p2/p3 stay inside their namespaces, then stores
// the rule. Throws naming the offending atom on a violation.
void register_rule(BibStore& store, ValidityRule rule);

// Two-stage validity decision. Stage 1 gates on affordance + capability;
// stage 2 conjoins every applicable rule. Zero applicable rules means the
// gate result stands.
Verdict check_validity(const BibStore& store, const CheckRequest& req);
Verdict check_validity_resolved(const SubjectRecord& subject, const ObjectRecord& object,
                                const std::string& operation, const AttrMap& args,
                                const ContextInfo& context,
                                const std::map<std::string, ValidityRule>& rules);

// True when the responder has logged a behavior answering `request`
// (args in_reply_to = request id) strictly before the deadline expires.
bool negotiation_responded(const BehaviorRecord& request, const std::vector<BehaviorRecord>& log,
                           Tick deadline_ticks);

// Issues a directive naming the fallback subject once the deadline has
// passed without a response. Due at request tick + deadline, but never
// before the tick boundary after the request.
std::optional<ReassignmentDirective> negotiation_timeout_check(
    const BehaviorRecord& request, const std::vector<BehaviorRecord>& log, Tick deadline_ticks,
    const std::string& fallback_subject, Tick now);

}  // namespace bun
