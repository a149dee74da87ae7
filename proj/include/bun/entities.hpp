#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "bun/literal.hpp"

namespace bun {

using Tick = std::int64_t;
using BehaviorId = std::int64_t;
using EventId = std::int64_t;

// An active agent: the only kind of entity that initiates behaviors.
struct SubjectRecord {
    std::string id;
    NameSet roles;
    NameSet capabilities;  // operation names this subject may perform
    AttrMap attributes;
    std::vector<std::string> goals;  // informational
};

// A passive resource. Its affordances are the closed set of operations that
// can ever be applied to it; its state is the only mutable part.
struct ObjectRecord {
    std::string id;
    std::string object_class;
    AttrMap attributes;  // semantic descriptors, fixed after registration
    AttrMap state;
    NameSet affordances;
    NameSet tags;
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
const char* to_string(CmpOp op);
bool cmp_holds(int three_way, CmpOp op);

enum class ModelKind { Threshold, LinearExtrapolation };
const char* to_string(ModelKind k);

struct ForecastModel {
    std::string id;
    ModelKind kind = ModelKind::Threshold;
    std::string path;  // series source, informational
    Decimal bound;
    CmpOp direction = CmpOp::Gt;  // Lt/Le/Gt/Ge only
    int window = 0;               // linear kind, >= 2
};

struct SeriesPoint {
    Tick tick = 0;
    Decimal value;
};

struct ModelOutput {
    bool fired = false;
    Decimal projected_value;
};

enum class EventKind { ObjectChanged, BehaviorRecorded, ExternalSignal };
const char* to_string(EventKind k);

// Changed paths; old value absent when the path did not exist before.
using DeltaMap = std::map<std::string, std::pair<std::optional<Literal>, Literal>>;

struct EventRecord {
    EventId id = 0;
    EventKind kind = EventKind::ObjectChanged;
    std::string entity_id;
    DeltaMap delta;
    NameSet tags;
    std::optional<BehaviorId> cause_behavior_id;
    Tick logical_time = 0;
};

enum class Outcome { Applied, Denied, Failed };
const char* to_string(Outcome o);
std::optional<Outcome> outcome_from(std::string_view word);

// The three predicate slots of a validity rule, in evaluation order.
enum class RulePart { SubjectPred, ObjectPred, OpContextPred };
const char* to_string(RulePart p);  // "p1", "p2", "p3"

struct RuleEval {
    std::string rule_id;
    bool subject_ok = false;
    bool object_ok = false;
    bool op_context_ok = false;
    bool all_ok() const { return subject_ok && object_ok && op_context_ok; }
};

struct FirstFailure {
    std::string rule_id;
    RulePart part = RulePart::SubjectPred;
    std::vector<std::string> failing_atoms;  // printed form of each false atom
};

struct Verdict {
    bool allow = false;
    bool gate_passed = false;
    std::string gate_reason;  // "gate:affordance" / "gate:capability" when the gate denied
    std::vector<RuleEval> evaluated;
    std::optional<FirstFailure> first_failure;
    std::string summary() const;  // "allow", "gate:...", or "rule:<id>:<part>"
};

struct ContextInfo {
    AttrMap values;  // always carries logical_time; free keys allowed
    NameSet tags;
};

// One validated interaction: subject applies an operation to an object.
struct BehaviorRecord {
    BehaviorId id = 0;
    Tick logical_time = 0;
    std::string subject_id;
    std::string operation;
    std::string object_id;
    AttrMap args;
    ContextInfo context;
    Verdict verdict;
    Outcome outcome = Outcome::Denied;
    std::string deny_reason;  // "", "gate:...", "rule:<id>:<part>", or "mutex"
    DeltaMap state_delta;     // non-empty only for applied writes
    std::optional<BehaviorId> caused_by;
    int cascade_depth = 0;
};

struct BehaviorFilter {
    std::optional<std::string> subject_id;
    std::optional<std::string> object_id;
    std::optional<std::string> operation;
    std::optional<Outcome> outcome;
    std::optional<Tick> from_time;  // inclusive
    std::optional<Tick> to_time;    // inclusive
    bool matches(const BehaviorRecord& rec) const;
};

}  // namespace bun
