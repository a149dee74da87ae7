#pragma once

#include "bun/trigger.hpp"

namespace bun {

// One perception-to-action rule of a scripted agent: when a delivery matches
// the pattern (and the optional guard holds against the event's object and
// context), request the templated behavior.
struct ReactiveClause {
    EventPattern pattern;
    PredicatePtr guard;  // may be null
    ActionTemplate action;  // actor filled with the agent's subject id
};

struct PeriodicClause {
    Tick every = 1;  // fires on ticks divisible by `every`
    ActionTemplate action;
};

struct AgentScript {
    std::string subject_id;
    std::vector<ReactiveClause> reactive;
    std::vector<PeriodicClause> periodic;
    std::optional<Tick> fail_at;  // agent stops acting at ticks >= fail_at
};

struct ScheduledEvent {
    Tick at = 0;
    std::string entity_id;
    AttrMap payload;
    NameSet tags;
};

// Declarative initial BIB contents, agent scripts, scheduled external
// events, and a seed, for deterministic replay. File format:
//
//   bun-scenario v1
//   name <word>
//   seed <u64>
//   [max_ticks <n>] [max_cascade_depth <n>] [dedup_window <n>]
//   [tick_budget <n>] [dedup_key trigger,actor,object]
//   SUBJECTS / OBJECTS / MODELS / RULES / TRIGGERS / AGENTS / EVENTS sections
struct Scenario {
    std::string name;
    std::uint64_t seed = 0;
    std::optional<Tick> max_ticks;
    PropagationPolicy policy;

    std::vector<SubjectRecord> subjects;
    std::vector<ObjectRecord> objects;
    std::vector<ForecastModel> models;
    std::vector<ValidityRule> rules;
    std::vector<TriggerRule> triggers;
    std::vector<Subscription> subscriptions;
    std::vector<AgentScript> agents;
    std::vector<ScheduledEvent> events;

    std::vector<std::string> warnings;  // static predicate lint, non-fatal
};

Scenario load_scenario(std::string_view text, const std::string& origin = "scenario");
Scenario load_scenario_file(const std::string& path);

// The attribute catalog induced by the scenario's entities, for lint.
AttributeCatalog scenario_catalog(const Scenario& sc);

}  // namespace bun
