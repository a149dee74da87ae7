#include "bun/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bun {

namespace {

void parse_clause_target(TokenStream& ts, ActionTemplate& action) {
    std::string obj = ts.expect_word("object id");
    if (obj == "$event.entity") {
        action.object_from_event = true;
    } else {
        action.object_id = obj;
    }
}

void parse_clause_tail(TokenStream& ts, ActionTemplate& action) {
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

// Cross-reference validation. Collects every unresolved id so the report
// names all of them at once.
void validate_scenario(Scenario& sc, const std::string& origin) {
    std::set<std::string> subject_ids, object_ids;
    for (const auto& s : sc.subjects) subject_ids.insert(s.id);
    for (const auto& o : sc.objects) object_ids.insert(o.id);

    std::vector<std::string> unresolved;
    auto need_subject = [&](const std::string& id, const std::string& what) {
        if (subject_ids.count(id) == 0) unresolved.push_back(what + " references subject '" + id + "'");
    };
    auto need_object = [&](const std::string& id, const std::string& what) {
        if (object_ids.count(id) == 0) unresolved.push_back(what + " references object '" + id + "'");
    };
    auto check_action = [&](const ActionTemplate& a, const std::string& what) {
        need_subject(a.actor, what);
        if (!a.object_from_event) need_object(a.object_id, what);
        if (!is_valid_name(a.operation))
            unresolved.push_back(what + " has malformed operation '" + a.operation + "'");
    };

    for (const auto& t : sc.triggers) check_action(t.action, "trigger " + t.id);
    for (const auto& sub : sc.subscriptions) {
        need_subject(sub.subscriber, "subscription " + sub.id);
        if (sub.pattern.entity_id) need_object(*sub.pattern.entity_id, "subscription " + sub.id);
    }
    for (const auto& a : sc.agents) {
        need_subject(a.subject_id, "agent block");
        for (const auto& c : a.reactive) {
            check_action(c.action, "agent " + a.subject_id + " reactive clause");
            if (c.pattern.entity_id)
                need_object(*c.pattern.entity_id, "agent " + a.subject_id + " clause pattern");
        }
        for (const auto& c : a.periodic)
            check_action(c.action, "agent " + a.subject_id + " periodic clause");
    }
    for (const auto& ev : sc.events) need_object(ev.entity_id, "scheduled event");
    for (const auto& t : sc.triggers) {
        if (t.pattern.entity_id) need_object(*t.pattern.entity_id, "trigger " + t.id + " pattern");
    }

    if (!unresolved.empty()) {
        std::string msg = origin + ": unresolved references:";
        for (const auto& u : unresolved) msg += "\n  " + u;
        throw Error(msg);
    }

    // predicate namespace checks beyond rules (rules are checked at
    // registration): trigger conditions and reactive guards see only the
    // event's object and the context
    for (const auto& t : sc.triggers) {
        if (!t.condition) continue;
        if (auto atom =
                find_namespace_violation(*t.condition, {EntityNs::Object, EntityNs::Context}))
            throw Error(origin + ": trigger " + t.id + " condition may not reference atom " + *atom);
    }
    for (const auto& a : sc.agents) {
        for (const auto& c : a.reactive) {
            if (!c.guard) continue;
            if (auto atom =
                    find_namespace_violation(*c.guard, {EntityNs::Object, EntityNs::Context}))
                throw Error(origin + ": agent " + a.subject_id +
                            " guard may not reference atom " + *atom);
        }
    }

    // static lint: unknown paths and incoherent comparisons become warnings
    AttributeCatalog cat = scenario_catalog(sc);
    auto lint = [&](const PredicatePtr& p, const std::string& what) {
        if (!p) return;
        for (auto& w : validate_predicate(*p, cat)) sc.warnings.push_back(what + ": " + w);
    };
    for (const auto& r : sc.rules) {
        lint(r.subject_pred, "rule " + r.id + " p1");
        lint(r.object_pred, "rule " + r.id + " p2");
        lint(r.op_context_pred, "rule " + r.id + " p3");
    }
    for (const auto& t : sc.triggers) lint(t.condition, "trigger " + t.id);
    for (const auto& a : sc.agents)
        for (const auto& c : a.reactive) lint(c.guard, "agent " + a.subject_id + " guard");
}

}  // namespace

AttributeCatalog scenario_catalog(const Scenario& sc) {
    AttributeCatalog cat;
    cat.paths["context.logical_time"] = LiteralKind::Int;
    cat.paths["op.name"] = LiteralKind::String;
    if (!sc.subjects.empty()) cat.paths["subject.id"] = LiteralKind::String;
    for (const auto& s : sc.subjects)
        for (const auto& [k, v] : s.attributes) cat.paths["subject.attributes." + k] = v.kind();
    if (!sc.objects.empty()) {
        cat.paths["object.id"] = LiteralKind::String;
        cat.paths["object.class"] = LiteralKind::String;
    }
    for (const auto& o : sc.objects) {
        for (const auto& [k, v] : o.attributes) cat.paths["object.attributes." + k] = v.kind();
        for (const auto& [k, v] : o.state) cat.paths["object.state." + k] = v.kind();
    }
    auto add_args = [&](const TemplateMap& args) {
        for (const auto& [k, tv] : args) {
            const Literal& sample = tv.is_choice() ? tv.choices.front() : tv.fixed;
            cat.paths["op.args." + k] = sample.kind();
        }
    };
    for (const auto& t : sc.triggers) add_args(t.action.args);
    for (const auto& a : sc.agents) {
        for (const auto& c : a.reactive) add_args(c.action.args);
        for (const auto& c : a.periodic) add_args(c.action.args);
    }
    return cat;
}

Scenario load_scenario(std::string_view text, const std::string& origin) {
    Scenario sc;
    auto lines = nonblank_lines(text);
    if (lines.empty() || lines.front().second != "bun-scenario v1")
        throw Error(origin + ": expected 'bun-scenario v1' header");

    enum class Section { Header, Subjects, Objects, Models, Rules, Triggers, Agents, Events };
    Section section = Section::Header;
    AgentScript* open_agent = nullptr;
    int sub_counter = 0;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [lineno, line] = lines[i];
        std::string where = origin + ":" + std::to_string(lineno);
        if (line == "SUBJECTS" || line == "OBJECTS" || line == "MODELS" || line == "RULES" ||
            line == "TRIGGERS" || line == "AGENTS" || line == "EVENTS") {
            if (open_agent) throw Error(where + ": agent block not closed with 'end'");
            if (line == "SUBJECTS") section = Section::Subjects;
            else if (line == "OBJECTS") section = Section::Objects;
            else if (line == "MODELS") section = Section::Models;
            else if (line == "RULES") section = Section::Rules;
            else if (line == "TRIGGERS") section = Section::Triggers;
            else if (line == "AGENTS") section = Section::Agents;
            else section = Section::Events;
            continue;
        }
        TokenStream ts(line, where);
        switch (section) {
            case Section::Header: {
                std::string key = ts.expect_word("header field");
                if (key == "name") {
                    sc.name = ts.expect_word("scenario name");
                } else if (key == "seed") {
                    sc.seed = static_cast<std::uint64_t>(ts.expect_int("seed"));
                } else if (key == "max_ticks") {
                    sc.max_ticks = ts.expect_int("max_ticks");
                } else if (key == "max_cascade_depth") {
                    sc.policy.max_cascade_depth = static_cast<int>(ts.expect_int("depth"));
                    if (sc.policy.max_cascade_depth <= 0)
                        ts.fail("max_cascade_depth must be positive");
                } else if (key == "dedup_window") {
                    sc.policy.dedup_window = ts.expect_int("window");
                    if (sc.policy.dedup_window <= 0) ts.fail("dedup_window must be positive");
                } else if (key == "tick_budget") {
                    sc.policy.tick_budget = static_cast<int>(ts.expect_int("budget"));
                    if (sc.policy.tick_budget <= 0) ts.fail("tick_budget must be positive");
                } else if (key == "dedup_key") {
                    sc.policy.key_trigger = sc.policy.key_actor = sc.policy.key_object = false;
                    while (true) {
                        std::string field = ts.expect_word("dedup key field");
                        if (field == "trigger") sc.policy.key_trigger = true;
                        else if (field == "actor") sc.policy.key_actor = true;
                        else if (field == "object") sc.policy.key_object = true;
                        else ts.fail("dedup key fields are trigger/actor/object");
                        if (!ts.accept_punct(",")) break;
                    }
                } else {
                    ts.fail("unknown header field '" + key + "'");
                }
                break;
            }
            case Section::Subjects:
                sc.subjects.push_back(parse_subject_line(ts));
                break;
            case Section::Objects:
                sc.objects.push_back(parse_object_line(ts));
                break;
            case Section::Models:
                sc.models.push_back(parse_model_line(ts));
                break;
            case Section::Rules:
                sc.rules.push_back(parse_rule_line(ts));
                break;
            case Section::Triggers:
                sc.triggers.push_back(parse_trigger_line(ts));
                break;
            case Section::Agents: {
                if (!open_agent) {
                    if (!ts.accept_word("agent")) ts.fail("expected 'agent <subject_id>'");
                    sc.agents.emplace_back();
                    open_agent = &sc.agents.back();
                    open_agent->subject_id = ts.expect_word("subject id");
                    break;
                }
                if (ts.accept_word("end")) {
                    open_agent = nullptr;
                    break;
                }
                if (ts.accept_word("subscribe")) {
                    Subscription sub;
                    ++sub_counter;
                    char buf[16];
                    std::snprintf(buf, sizeof buf, "sub%03d", sub_counter);
                    sub.id = buf;
                    sub.subscriber = open_agent->subject_id;
                    sub.pattern = parse_event_pattern(ts);
                    if (sub.pattern.empty()) ts.fail("subscription needs at least one filter");
                    sc.subscriptions.push_back(std::move(sub));
                    break;
                }
                if (ts.accept_word("on")) {
                    ReactiveClause clause;
                    clause.pattern = parse_event_pattern(ts);
                    if (ts.accept_word("when")) clause.guard = parse_predicate(ts);
                    if (!ts.accept_word("do")) ts.fail("expected 'do'");
                    clause.action.actor = open_agent->subject_id;
                    clause.action.operation = ts.expect_word("operation");
                    parse_clause_target(ts, clause.action);
                    parse_clause_tail(ts, clause.action);
                    open_agent->reactive.push_back(std::move(clause));
                    break;
                }
                if (ts.accept_word("every")) {
                    PeriodicClause clause;
                    clause.every = ts.expect_int("tick interval");
                    if (clause.every < 1) ts.fail("'every' interval must be >= 1");
                    if (!ts.accept_word("do")) ts.fail("expected 'do'");
                    clause.action.actor = open_agent->subject_id;
                    clause.action.operation = ts.expect_word("operation");
                    std::string obj = ts.expect_word("object id");
                    if (obj == "$event.entity")
                        ts.fail("periodic clauses have no event; object must be a literal id");
                    clause.action.object_id = obj;
                    parse_clause_tail(ts, clause.action);
                    open_agent->periodic.push_back(std::move(clause));
                    break;
                }
                if (ts.accept_word("fail_at")) {
                    open_agent->fail_at = ts.expect_int("tick");
                    break;
                }
                ts.fail("unknown agent clause '" + ts.peek().text + "'");
                break;
            }
            case Section::Events: {
                if (!ts.accept_word("at")) ts.fail("expected 'at <tick> external ...'");
                ScheduledEvent ev;
                ev.at = ts.expect_int("tick");
                if (ev.at < 0) ts.fail("event tick must be non-negative");
                if (!ts.accept_word("external")) ts.fail("expected 'external'");
                ev.entity_id = ts.expect_word("entity id");
                if (!ts.accept_word("delta")) ts.fail("expected 'delta'");
                ev.payload = parse_attr_map(ts);
                if (ts.accept_word("tags")) ev.tags = parse_name_set(ts);
                sc.events.push_back(std::move(ev));
                break;
            }
        }
        if (!ts.at_end()) ts.fail("trailing input");
    }
    if (open_agent) throw Error(origin + ": agent block not closed with 'end'");

    validate_scenario(sc, origin);
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str(), path);
}

}  // namespace bun
