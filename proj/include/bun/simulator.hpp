#pragma once

#include "bun/scenario.hpp"

namespace bun {

struct AgentCounters {
    std::int64_t requests = 0;
    std::int64_t applied = 0;
    std::int64_t denied = 0;
    std::int64_t failed = 0;
};

struct RunResult {
    Tick final_tick = 0;
    bool quiescent = false;
    std::vector<BehaviorRecord> log;
    std::vector<EventRecord> feed;
    std::vector<FiringDecision> decisions;
    std::map<std::string, AgentCounters> per_agent;
};

// Discrete-event simulator hosting the behavior cycle: perceive (deliveries),
// decide (clauses and triggers), act (validity check, mutex, state change),
// record (log + feed). Single-threaded by contract; all within-tick ordering
// is fixed so identical (scenario, seed) runs are byte-identical on export.
//
// Within one tick t:
//   1. negotiation deadlines are checked; due directives become events at t
//   2. scheduled external events with at <= t are appended, then injected ones
//   3. events not yet processed (including those emitted by behaviors at t-1)
//      are delivered to subscriptions and offered to triggers, in id order
//   4. agents act on this tick's deliveries (subject id order; reactive
//      clauses in declaration order over deliveries in event order; then
//      periodic clauses), producing requests
//   5. trigger requests drain (priority desc, trigger id asc, event id asc)
//      and run after the agent requests
//   6. each request: check_validity -> write mutex -> apply state delta ->
//      append behavior -> emit events (visible from t+1)
class Simulator {
public:
    explicit Simulator(const Scenario& scenario,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

    // Queues an environment event for the next step.
    void inject_external_event(const std::string& entity_id, AttrMap payload, NameSet tags);

    bool quiescent() const;
    void step();
    RunResult run(Tick max_ticks);

    Tick tick() const { return tick_; }
    const BibStore& store() const { return store_; }
    const TriggerEngine& trigger_engine() const { return engine_; }
    const MutexGuard& mutex() const { return mutex_; }
    const std::map<std::string, AgentCounters>& counters() const { return counters_; }
    RunResult result() const;

private:
    struct NegotiationWatch {
        BehaviorId request_id = 0;
        Tick deadline = 0;
        std::string fallback;
    };

    void check_negotiations();
    void execute_request(const BehaviorRequest& req);
    bool agent_failed(const AgentScript& agent) const;

    Scenario scenario_;
    BibStore store_;
    TriggerEngine engine_;
    MutexGuard mutex_;
    std::mt19937_64 rng_;
    Tick tick_ = 1;
    EventId processed_upto_ = 0;
    std::size_t scheduled_next_ = 0;  // scenario events are sorted by tick
    std::vector<ScheduledEvent> injected_;
    std::vector<NegotiationWatch> watches_;
    std::map<std::string, AgentCounters> counters_;
};

RunResult run_scenario(const Scenario& scenario, Tick max_ticks,
                       std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace bun
