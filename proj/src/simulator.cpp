#include "bun/simulator.hpp"

#include <algorithm>

namespace bun {

Simulator::Simulator(const Scenario& scenario, std::optional<std::uint64_t> seed_override)
    : scenario_(scenario), engine_(scenario.policy) {
    for (const auto& s : scenario_.subjects) store_.put_entity(s);
    for (const auto& o : scenario_.objects) store_.put_entity(o);
    for (const auto& m : scenario_.models) store_.put_entity(m);
    for (const auto& r : scenario_.rules) register_rule(store_, r);
    for (const auto& t : scenario_.triggers) engine_.register_trigger(t);
    for (const auto& sub : scenario_.subscriptions) engine_.subscribe(store_, sub);
    std::stable_sort(scenario_.events.begin(), scenario_.events.end(),
                     [](const ScheduledEvent& a, const ScheduledEvent& b) { return a.at < b.at; });
    std::stable_sort(scenario_.agents.begin(), scenario_.agents.end(),
                     [](const AgentScript& a, const AgentScript& b) {
                         return a.subject_id < b.subject_id;
                     });
    rng_.seed(seed_override ? *seed_override : scenario_.seed);
    for (const auto& a : scenario_.agents) counters_[a.subject_id];
}

void Simulator::inject_external_event(const std::string& entity_id, AttrMap payload, NameSet tags) {
    if (!store_.find_object(entity_id))
        throw Error("injected event names unknown entity: " + entity_id);
    ScheduledEvent ev;
    ev.at = tick_;
    ev.entity_id = entity_id;
    ev.payload = std::move(payload);
    ev.tags = std::move(tags);
    injected_.push_back(std::move(ev));
}

bool Simulator::agent_failed(const AgentScript& agent) const {
    return agent.fail_at && tick_ >= *agent.fail_at;
}

bool Simulator::quiescent() const {
    if (processed_upto_ < static_cast<EventId>(store_.event_feed().size())) return false;
    if (scheduled_next_ < scenario_.events.size()) return false;
    if (!injected_.empty()) return false;
    if (!watches_.empty()) return false;
    for (const auto& a : scenario_.agents)
        if (!a.periodic.empty() && !agent_failed(a)) return false;
    return true;
}

void Simulator::check_negotiations() {
    std::vector<NegotiationWatch> still_open;
    for (const auto& w : watches_) {
        const BehaviorRecord& request =
            store_.behavior_log()[static_cast<std::size_t>(w.request_id) - 1];
        if (negotiation_responded(request, store_.behavior_log(), w.deadline)) continue;
        auto directive =
            negotiation_timeout_check(request, store_.behavior_log(), w.deadline, w.fallback, tick_);
        if (directive) {
            AttrMap payload;
            payload["reassigned_to"] = Literal::of_string(directive->fallback_subject);
            payload["request_behavior"] = Literal::of_int(directive->request_id);
            const ObjectRecord& obj = store_.object(request.object_id);
            store_.append_external_event(request.object_id, payload, obj.tags, request.id, tick_);
            continue;
        }
        still_open.push_back(w);
    }
    watches_ = std::move(still_open);
}

void Simulator::execute_request(const BehaviorRequest& req) {
    AgentCounters& counters = counters_[req.actor];
    ++counters.requests;

    const ObjectRecord& object = store_.object(req.object_id);
    ContextInfo context;
    context.values["logical_time"] = Literal::of_int(tick_);
    context.tags = object.tags;

    CheckRequest check;
    check.subject_id = req.actor;
    check.operation = req.operation;
    check.object_id = req.object_id;
    check.args = req.args;
    check.context = context;
    Verdict verdict = check_validity(store_, check);

    BehaviorRecord rec;
    rec.logical_time = tick_;
    rec.subject_id = req.actor;
    rec.operation = req.operation;
    rec.object_id = req.object_id;
    rec.args = req.args;
    rec.context = context;
    rec.verdict = verdict;
    rec.caused_by = req.caused_by;
    rec.cascade_depth = req.caused_by ? req.cascade_depth : 0;

    bool wants_write = !req.set_values.empty();
    if (!verdict.allow) {
        rec.outcome = Outcome::Denied;
        rec.deny_reason = verdict.summary();
    } else if (wants_write && !mutex_.acquire(req.object_id, tick_, store_.next_behavior_id())) {
        rec.outcome = Outcome::Denied;
        rec.deny_reason = "mutex";
    } else {
        rec.outcome = Outcome::Applied;
        if (wants_write) {
            for (const auto& [path, value] : req.set_values) {
                std::optional<Literal> old;
                auto it = object.state.find(path);
                if (it != object.state.end()) old = it->second;
                rec.state_delta[path] = {old, value};
            }
        }
    }

    BehaviorId id = store_.append_behavior(rec);
    if (rec.outcome == Outcome::Applied && wants_write) {
        store_.update_object_state(req.object_id, req.set_values, id, tick_);
    }
    if (rec.outcome == Outcome::Applied) {
        ++counters.applied;
        auto responder = req.args.find("responder");
        auto deadline = req.args.find("deadline_ticks");
        auto fallback = req.args.find("fallback");
        if (responder != req.args.end() && deadline != req.args.end() &&
            fallback != req.args.end() && responder->second.kind() == LiteralKind::String &&
            deadline->second.kind() == LiteralKind::Int &&
            fallback->second.kind() == LiteralKind::String) {
            watches_.push_back({id, deadline->second.as_int(), fallback->second.as_string()});
        }
    } else {
        ++counters.denied;
    }
}

void Simulator::step() {
    const Tick t = tick_;
    engine_.begin_tick(t);

    // 1. due negotiation directives
    check_negotiations();

    // 2. scheduled externals for this tick, then injected ones
    while (scheduled_next_ < scenario_.events.size() &&
           scenario_.events[scheduled_next_].at <= t) {
        const ScheduledEvent& ev = scenario_.events[scheduled_next_++];
        store_.append_external_event(ev.entity_id, ev.payload, ev.tags, std::nullopt, t);
    }
    for (const auto& ev : injected_)
        store_.append_external_event(ev.entity_id, ev.payload, ev.tags, std::nullopt, t);
    injected_.clear();

    // 3. deliver + match everything that became visible since last step
    std::vector<EventRecord> incoming = store_.change_feed_since(processed_upto_);
    processed_upto_ = static_cast<EventId>(store_.event_feed().size());
    std::size_t deliveries_start = engine_.deliveries().size();
    for (const auto& ev : incoming) engine_.process_event(ev, store_, t, rng_);

    // 4. agent phase, subject id order
    std::vector<BehaviorRequest> agent_requests;
    const auto& deliveries = engine_.deliveries();
    for (const auto& agent : scenario_.agents) {
        if (agent_failed(agent)) continue;
        for (const auto& clause : agent.reactive) {
            for (std::size_t d = deliveries_start; d < deliveries.size(); ++d) {
                if (deliveries[d].subscriber != agent.subject_id) continue;
                const EventRecord& ev =
                    store_.event_feed()[static_cast<std::size_t>(deliveries[d].event_id) - 1];
                if (!clause.pattern.matches(ev)) continue;
                if (clause.guard) {
                    BindingEnv env;
                    env.object = store_.find_object(ev.entity_id);
                    env.context.values["logical_time"] = Literal::of_int(t);
                    env.context.tags = ev.tags;
                    if (!evaluate(*clause.guard, env).value) continue;
                }
                BehaviorRequest req;
                req.actor = agent.subject_id;
                req.operation = clause.action.operation;
                req.object_id = clause.action.object_from_event ? ev.entity_id
                                                                : clause.action.object_id;
                req.args = resolve_template_map(clause.action.args, rng_);
                req.set_values = resolve_template_map(clause.action.set_values, rng_);
                req.caused_by = ev.cause_behavior_id;
                if (ev.cause_behavior_id) {
                    const auto& log = store_.behavior_log();
                    req.cascade_depth =
                        log[static_cast<std::size_t>(*ev.cause_behavior_id) - 1].cascade_depth + 1;
                }
                req.event_id = ev.id;
                agent_requests.push_back(std::move(req));
            }
        }
        for (const auto& clause : agent.periodic) {
            if (t % clause.every != 0) continue;
            BehaviorRequest req;
            req.actor = agent.subject_id;
            req.operation = clause.action.operation;
            req.object_id = clause.action.object_id;
            req.args = resolve_template_map(clause.action.args, rng_);
            req.set_values = resolve_template_map(clause.action.set_values, rng_);
            agent_requests.push_back(std::move(req));
        }
    }

    // 5-6. agents first, then drained trigger requests
    for (const auto& req : agent_requests) execute_request(req);
    for (const auto& req : engine_.drain_pending(t)) execute_request(req);

    tick_ = t + 1;
}

RunResult Simulator::result() const {
    RunResult r;
    r.final_tick = tick_ - 1;
    r.quiescent = quiescent();
    r.log = store_.behavior_log();
    r.feed = store_.event_feed();
    r.decisions = engine_.decisions();
    r.per_agent = counters_;
    return r;
}

RunResult Simulator::run(Tick max_ticks) {
    while (!quiescent() && tick_ <= max_ticks) step();
    return result();
}

RunResult run_scenario(const Scenario& scenario, Tick max_ticks,
                       std::optional<std::uint64_t> seed_override) {
    Simulator sim(scenario, seed_override);
    return sim.run(max_ticks);
}

}  // namespace bun
