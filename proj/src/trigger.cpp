#include "bun/trigger.hpp"

#include <algorithm>

namespace bun {

bool EventPattern::matches(const EventRecord& ev) const {
    if (kind && ev.kind != *kind) return false;
    if (entity_id && ev.entity_id != *entity_id) return false;
    for (const auto& t : tags)
        if (ev.tags.count(t) == 0) return false;
    if (path_prefix) {
        bool any = false;
        for (const auto& [path, change] : ev.delta) {
            (void)change;
            if (path.rfind(*path_prefix, 0) == 0) {
                any = true;
                break;
            }
        }
        if (!any) return false;
    }
    return true;
}

std::string render_event_pattern(const EventPattern& p) {
    std::string out = "{";
    bool first = true;
    auto field = [&](const std::string& k, const std::string& v) {
        if (!first) out += ",";
        first = false;
        out += k + ":" + v;
    };
    if (p.kind) field("kind", to_string(*p.kind));
    if (p.entity_id) field("entity", *p.entity_id);
    if (!p.tags.empty()) field("tags", render_name_set(p.tags));
    if (p.path_prefix) field("path", *p.path_prefix);
    out += "}";
    return out;
}

EventPattern parse_event_pattern(TokenStream& ts) {
    EventPattern p;
    ts.expect_punct("{");
    if (ts.accept_punct("}")) return p;
    while (true) {
        std::string key = ts.expect_word("pattern field");
        ts.expect_punct(":");
        if (key == "kind") {
            std::string kind = ts.expect_word("event kind");
            if (kind == "object_changed") p.kind = EventKind::ObjectChanged;
            else if (kind == "behavior_recorded") p.kind = EventKind::BehaviorRecorded;
            else if (kind == "external_signal") p.kind = EventKind::ExternalSignal;
            else ts.fail("unknown event kind '" + kind + "'");
        } else if (key == "entity") {
            p.entity_id = ts.expect_word("entity id");
        } else if (key == "tags") {
            p.tags = parse_name_set(ts);
        } else if (key == "path") {
            p.path_prefix = ts.expect_word("path prefix");
        } else {
            ts.fail("unknown pattern field '" + key + "' (kind/entity/tags/path)");
        }
        if (ts.accept_punct(",")) continue;
        ts.expect_punct("}");
        break;
    }
    return p;
}

TemplateMap parse_template_map(TokenStream& ts) {
    TemplateMap out;
    ts.expect_punct("{");
    if (ts.accept_punct("}")) return out;
    while (true) {
        std::string key = ts.expect_word("path");
        ts.expect_punct(":");
        TemplateValue tv;
        if (ts.peek().text == "$choice") {
            ts.next();
            ts.expect_punct("(");
            tv.choices.push_back(parse_literal(ts));
            while (ts.accept_punct("|")) tv.choices.push_back(parse_literal(ts));
            ts.expect_punct(")");
        } else {
            tv.fixed = parse_literal(ts);
        }
        out[key] = std::move(tv);
        if (ts.accept_punct(",")) continue;
        ts.expect_punct("}");
        break;
    }
    return out;
}

std::string render_template_map(const TemplateMap& m) {
    std::string out = "{";
    bool first = true;
    for (const auto& [k, tv] : m) {
        if (!first) out += ",";
        first = false;
        out += k + ":";
        if (tv.is_choice()) {
            out += "$choice(";
            for (std::size_t i = 0; i < tv.choices.size(); ++i) {
                if (i) out += "|";
                out += tv.choices[i].str();
            }
            out += ")";
        } else {
            out += tv.fixed.str();
        }
    }
    out += "}";
    return out;
}

AttrMap resolve_template_map(const TemplateMap& tmpl, std::mt19937_64& rng) {
    AttrMap out;
    for (const auto& [k, tv] : tmpl) {
        if (tv.is_choice()) {
            out[k] = tv.choices[static_cast<std::size_t>(rng() % tv.choices.size())];
        } else {
            out[k] = tv.fixed;
        }
    }
    return out;
}

// trigger <id> priority <n> on <pattern> when <expr> do <actor> <op> <object>
//         [set {..}] [args {..}] [desc "..."]
std::string render_trigger_line(const TriggerRule& t) {
    std::string out = "trigger " + t.id + " priority " + std::to_string(t.priority) + " on " +
                      render_event_pattern(t.pattern) + " when " + print_predicate(t.condition) +
                      " do " + t.action.actor + " " + t.action.operation + " " +
                      (t.action.object_from_event ? "$event.entity" : t.action.object_id);
    if (!t.action.set_values.empty()) out += " set " + render_template_map(t.action.set_values);
    if (!t.action.args.empty()) out += " args " + render_template_map(t.action.args);
    if (!t.description.empty()) out += " desc " + quote_string(t.description);
    return out;
}

namespace {

void parse_action_target(TokenStream& ts, ActionTemplate& action) {
    std::string obj = ts.expect_word("object id");
    if (obj == "$event.entity") {
        action.object_from_event = true;
    } else {
        action.object_id = obj;
    }
}

void parse_action_tail(TokenStream& ts, ActionTemplate& action) {
    while (!ts.at_end()) {
        if (ts.accept_word("set")) {
            action.set_values = parse_template_map(ts);
        } else if (ts.accept_word("args")) {
            action.args = parse_template_map(ts);
        } else {
            break;
        }
    }
}

}  // namespace

TriggerRule parse_trigger_line(TokenStream& ts) {
    TriggerRule t;
    if (!ts.accept_word("trigger")) ts.fail("expected 'trigger'");
    t.id = ts.expect_word("trigger id");
    if (!ts.accept_word("priority")) ts.fail("expected 'priority'");
    t.priority = static_cast<int>(ts.expect_int("priority"));
    if (!ts.accept_word("on")) ts.fail("expected 'on'");
    t.pattern = parse_event_pattern(ts);
    if (!ts.accept_word("when")) ts.fail("expected 'when'");
    t.condition = parse_predicate(ts);
    if (!ts.accept_word("do")) ts.fail("expected 'do'");
    t.action.actor = ts.expect_word("actor subject id");
    t.action.operation = ts.expect_word("operation");
    parse_action_target(ts, t.action);
    parse_action_tail(ts, t.action);
    if (ts.accept_word("desc")) {
        Token tok = ts.next();
        if (tok.type != Token::Type::String) ts.fail_at(tok, "desc takes a quoted string");
        t.description = tok.text;
    }
    return t;
}

const char* to_string(FireReason r) {
    switch (r) {
        case FireReason::Fired: return "fired";
        case FireReason::ConditionFalse: return "condition_false";
        case FireReason::Deduped: return "deduped";
        case FireReason::DepthExceeded: return "depth_exceeded";
        case FireReason::BudgetExhausted: return "budget_exhausted";
    }
    return "?";
}

std::optional<FireReason> fire_reason_from(std::string_view word) {
    if (word == "fired") return FireReason::Fired;
    if (word == "condition_false") return FireReason::ConditionFalse;
    if (word == "deduped") return FireReason::Deduped;
    if (word == "depth_exceeded") return FireReason::DepthExceeded;
    if (word == "budget_exhausted") return FireReason::BudgetExhausted;
    return std::nullopt;
}

std::string TriggerEngine::subscribe(const BibStore& store, Subscription sub) {
    if (sub.pattern.empty())
        throw Error("subscription " + sub.id + " needs at least one filter field");
    if (!store.find_subject(sub.subscriber))
        throw Error("subscription " + sub.id + " names unknown subscriber " + sub.subscriber);
    if (sub.id.empty()) throw Error("subscription id must be non-empty");
    std::string id = sub.id;
    subs_.insert_or_assign(id, std::move(sub));
    return id;
}

void TriggerEngine::register_trigger(TriggerRule rule) {
    if (rule.id.empty() || !is_valid_id(rule.id))
        throw Error("trigger id '" + rule.id + "' is malformed");
    if (!rule.condition) rule.condition = make_true();
    if (auto atom =
            find_namespace_violation(*rule.condition, {EntityNs::Object, EntityNs::Context}))
        throw Error("trigger " + rule.id + ": condition may not reference atom " + *atom);
    triggers_.insert_or_assign(rule.id, std::move(rule));
}

std::vector<const TriggerRule*> TriggerEngine::match_triggers(const EventRecord& ev) const {
    std::vector<const TriggerRule*> out;
    for (const auto& [id, rule] : triggers_)
        if (rule.pattern.matches(ev)) out.push_back(&rule);
    std::stable_sort(out.begin(), out.end(), [](const TriggerRule* a, const TriggerRule* b) {
        if (a->priority != b->priority) return a->priority > b->priority;
        return a->id < b->id;
    });
    return out;
}

void TriggerEngine::begin_tick(Tick tick) {
    current_tick_ = tick;
    fired_this_tick_ = 0;
}

std::string TriggerEngine::dedup_key(const TriggerRule& rule, const ActionTemplate& action,
                                     const std::string& resolved_object) const {
    std::string key;
    if (policy_.key_trigger) key += rule.id;
    key += "|";
    if (policy_.key_actor) key += action.actor;
    key += "|";
    if (policy_.key_object) key += resolved_object;
    return key;
}

FiringDecision TriggerEngine::fire(const TriggerRule& rule, const EventRecord& ev,
                                   const BibStore& store, Tick tick, std::mt19937_64& rng) {
    FiringDecision d;
    d.seq = next_decision_seq_++;
    d.tick = tick;
    d.trigger_id = rule.id;
    d.event_id = ev.id;

    BindingEnv env;
    env.object = store.find_object(ev.entity_id);
    env.context.values["logical_time"] = Literal::of_int(tick);
    env.context.tags = ev.tags;

    std::string object_id = rule.action.object_from_event ? ev.entity_id : rule.action.object_id;
    int depth = 0;
    if (ev.cause_behavior_id) {
        const auto& log = store.behavior_log();
        auto idx = static_cast<std::size_t>(*ev.cause_behavior_id) - 1;
        if (idx < log.size()) depth = log[idx].cascade_depth + 1;
    }

    if (!evaluate(*rule.condition, env).value) {
        d.reason = FireReason::ConditionFalse;
    } else if (auto last = dedup_last_fired_.find(dedup_key(rule, rule.action, object_id));
               last != dedup_last_fired_.end() && tick - last->second < policy_.dedup_window) {
        d.reason = FireReason::Deduped;
    } else if (depth > policy_.max_cascade_depth) {
        d.reason = FireReason::DepthExceeded;
    } else if (fired_this_tick_ >= policy_.tick_budget) {
        d.reason = FireReason::BudgetExhausted;
    } else {
        d.reason = FireReason::Fired;
        d.fired = true;
        ++fired_this_tick_;
        dedup_last_fired_[dedup_key(rule, rule.action, object_id)] = tick;
        BehaviorRequest req;
        req.actor = rule.action.actor;
        req.operation = rule.action.operation;
        req.object_id = object_id;
        req.args = resolve_template_map(rule.action.args, rng);
        req.set_values = resolve_template_map(rule.action.set_values, rng);
        req.caused_by = ev.cause_behavior_id;
        req.cascade_depth = depth;
        req.priority = rule.priority;
        req.trigger_id = rule.id;
        req.event_id = ev.id;
        pending_.push_back(std::move(req));
    }
    decisions_.push_back(d);
    return d;
}

std::size_t TriggerEngine::process_event(const EventRecord& ev, const BibStore& store, Tick tick,
                                         std::mt19937_64& rng) {
    std::size_t delivered = 0;
    for (const auto& [id, sub] : subs_) {
        if (sub.pattern.matches(ev)) {
            deliveries_.push_back({id, sub.subscriber, ev.id, tick});
            ++delivered;
        }
    }
    for (const TriggerRule* rule : match_triggers(ev)) fire(*rule, ev, store, tick, rng);
    return delivered;
}

std::vector<BehaviorRequest> TriggerEngine::drain_pending(Tick) {
    std::vector<BehaviorRequest> out = std::move(pending_);
    pending_.clear();
    std::stable_sort(out.begin(), out.end(), [](const BehaviorRequest& a, const BehaviorRequest& b) {
        if (a.priority != b.priority) return a.priority > b.priority;
        if (a.trigger_id != b.trigger_id) return a.trigger_id < b.trigger_id;
        return a.event_id < b.event_id;
    });
    return out;
}

}  // namespace bun
