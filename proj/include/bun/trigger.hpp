#pragma once

#include <random>

#include "bun/store.hpp"

namespace bun {

// Event filter shared by subscriptions, trigger rules and reactive clauses.
// Tag matching is subset semantics: the pattern's tags must all be carried
// by the event. The path filter matches any delta path with that prefix.
struct EventPattern {
    std::optional<EventKind> kind;
    std::optional<std::string> entity_id;
    NameSet tags;
    std::optional<std::string> path_prefix;

    bool empty() const { return !kind && !entity_id && tags.empty() && !path_prefix; }
    bool matches(const EventRecord& ev) const;
};

std::string render_event_pattern(const EventPattern& p);
EventPattern parse_event_pattern(TokenStream& ts);

struct Subscription {
    std::string id;
    std::string subscriber;  // subject id
    EventPattern pattern;
    Tick created_at = 0;
};

// Template values may be a fixed literal or a seeded choice among literals.
struct TemplateValue {
    Literal fixed;
    std::vector<Literal> choices;  // non-empty means pick one with the run RNG
    bool is_choice() const { return !choices.empty(); }
};
using TemplateMap = std::map<std::string, TemplateValue>;

// What to do when a trigger fires or a clause matches: actor performs
// operation on an object (a literal id or the matched event's entity),
// applying `set` to its state with `args` as operation arguments.
struct ActionTemplate {
    std::string actor;
    std::string operation;
    std::string object_id;        // literal id unless object_from_event
    bool object_from_event = false;  // written as $event.entity
    TemplateMap set_values;
    TemplateMap args;
};

struct TriggerRule {
    std::string id;
    EventPattern pattern;
    PredicatePtr condition;  // over object + context at firing time
    ActionTemplate action;
    int priority = 0;  // higher fires first
    std::string description;
};

std::string render_trigger_line(const TriggerRule& t);
TriggerRule parse_trigger_line(TokenStream& ts);

struct PropagationPolicy {
    int max_cascade_depth = 16;
    Tick dedup_window = 10;
    int tick_budget = 1000;
    // dedup key fields; all three by default
    bool key_trigger = true;
    bool key_actor = true;
    bool key_object = true;
};

enum class FireReason { Fired, ConditionFalse, Deduped, DepthExceeded, BudgetExhausted };
const char* to_string(FireReason r);
std::optional<FireReason> fire_reason_from(std::string_view word);

struct FiringDecision {
    std::int64_t seq = 0;
    Tick tick = 0;
    std::string trigger_id;
    EventId event_id = 0;
    bool fired = false;
    FireReason reason = FireReason::ConditionFalse;
};

struct BehaviorRequest {
    std::string actor;
    std::string operation;
    std::string object_id;
    AttrMap args;
    AttrMap set_values;  // state delta to apply when allowed
    std::optional<BehaviorId> caused_by;
    int cascade_depth = 0;
    // drain ordering
    int priority = 0;
    std::string trigger_id;
    EventId event_id = 0;
};

struct Delivery {
    std::string subscription_id;
    std::string subscriber;
    EventId event_id = 0;
    Tick tick = 0;
};

TemplateMap parse_template_map(TokenStream& ts);
std::string render_template_map(const TemplateMap& m);
AttrMap resolve_template_map(const TemplateMap& tmpl, std::mt19937_64& rng);

// Matching and condition evaluation are pure; the pending queue, dedup
// ledger and budget mutate only inside the serialized dispatch step.
class TriggerEngine {
public:
    explicit TriggerEngine(PropagationPolicy policy = {}) : policy_(policy) {}

    std::string subscribe(const BibStore& store, Subscription sub);
    void register_trigger(TriggerRule rule);

    const PropagationPolicy& policy() const { return policy_; }
    const std::map<std::string, Subscription>& subscriptions() const { return subs_; }
    const std::map<std::string, TriggerRule>& triggers() const { return triggers_; }

    // All rules whose pattern matches, ordered (priority desc, id asc).
    std::vector<const TriggerRule*> match_triggers(const EventRecord& ev) const;

    void begin_tick(Tick tick);

    // Evaluates the governed firing chain for one matched rule and records
    // the decision. On Fired, the resulting request joins the pending queue.
    FiringDecision fire(const TriggerRule& rule, const EventRecord& ev, const BibStore& store,
                        Tick tick, std::mt19937_64& rng);

    // Deliveries to matching subscriptions plus trigger matching, in one
    // pass. Returns the number of deliveries made.
    std::size_t process_event(const EventRecord& ev, const BibStore& store, Tick tick,
                              std::mt19937_64& rng);

    // All requests generated this tick, ordered (priority desc, trigger id
    // asc, event id asc); the queue empties.
    std::vector<BehaviorRequest> drain_pending(Tick tick);

    const std::vector<FiringDecision>& decisions() const { return decisions_; }
    const std::vector<Delivery>& deliveries() const { return deliveries_; }

private:
    std::string dedup_key(const TriggerRule& rule, const ActionTemplate& action,
                          const std::string& resolved_object) const;

    PropagationPolicy policy_;
    std::map<std::string, Subscription> subs_;
    std::map<std::string, TriggerRule> triggers_;
    std::map<std::string, Tick> dedup_last_fired_;
    std::vector<FiringDecision> decisions_;
    std::vector<Delivery> deliveries_;
    std::vector<BehaviorRequest> pending_;
    Tick current_tick_ = 0;
    int fired_this_tick_ = 0;
    std::int64_t next_decision_seq_ = 1;
};

}  // namespace bun
