#include "bun/entities.hpp"

namespace bun {

const char* to_string(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

bool cmp_holds(int three_way, CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return three_way == 0;
        case CmpOp::Ne: return three_way != 0;
        case CmpOp::Lt: return three_way < 0;
        case CmpOp::Le: return three_way <= 0;
        case CmpOp::Gt: return three_way > 0;
        case CmpOp::Ge: return three_way >= 0;
    }
    return false;
}

const char* to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Threshold: return "threshold";
        case ModelKind::LinearExtrapolation: return "linear";
    }
    return "?";
}

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::ObjectChanged: return "object_changed";
        case EventKind::BehaviorRecorded: return "behavior_recorded";
        case EventKind::ExternalSignal: return "external_signal";
    }
    return "?";
}

const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::Applied: return "applied";
        case Outcome::Denied: return "denied";
        case Outcome::Failed: return "failed";
    }
    return "?";
}

std::optional<Outcome> outcome_from(std::string_view word) {
    if (word == "applied") return Outcome::Applied;
    if (word == "denied") return Outcome::Denied;
    if (word == "failed") return Outcome::Failed;
    return std::nullopt;
}

const char* to_string(RulePart p) {
    switch (p) {
        case RulePart::SubjectPred: return "p1";
        case RulePart::ObjectPred: return "p2";
        case RulePart::OpContextPred: return "p3";
    }
    return "?";
}

std::string Verdict::summary() const {
    if (!gate_passed) return gate_reason.empty() ? "gate:denied" : gate_reason;
    if (first_failure)
        return "rule:" + first_failure->rule_id + ":" + to_string(first_failure->part);
    return "allow";
}

bool BehaviorFilter::matches(const BehaviorRecord& rec) const {
    if (subject_id && rec.subject_id != *subject_id) return false;
    if (object_id && rec.object_id != *object_id) return false;
    if (operation && rec.operation != *operation) return false;
    if (outcome && rec.outcome != *outcome) return false;
    if (from_time && rec.logical_time < *from_time) return false;
    if (to_time && rec.logical_time > *to_time) return false;
    return true;
}

}  // namespace bun
