#include "bun/store.hpp"

#include <sstream>

namespace bun {

namespace {

void check_names(const NameSet& names, const std::string& owner, const char* what) {
    for (const auto& n : names) {
        if (!is_valid_name(n))
            throw Error(owner + ": " + what + " entry '" + n + "' is not a valid operation name");
    }
}

void check_keys(const AttrMap& m, const std::string& owner, const char* what) {
    for (const auto& [k, v] : m) {
        (void)v;
        if (!is_valid_id(k))
            throw Error(owner + ": " + what + " key '" + k + "' is not a valid attribute path");
    }
}

void check_tokens(const NameSet& names, const std::string& owner, const char* what) {
    for (const auto& n : names) {
        if (!is_valid_id(n)) throw Error(owner + ": " + what + " entry '" + n + "' is malformed");
    }
}

}  // namespace

void BibStore::claim_id(const std::string& id, EntityType t) {
    if (id.empty()) throw Error("entity id must be non-empty");
    if (!is_valid_id(id)) throw Error("entity id '" + id + "' is malformed");
    auto it = id_kinds_.find(id);
    if (it != id_kinds_.end() && it->second != t)
        throw Error("id '" + id + "' already names an entity of a different type");
    id_kinds_[id] = t;
}

const std::string& BibStore::put_entity(SubjectRecord s) {
    claim_id(s.id, EntityType::Subject);
    check_names(s.capabilities, s.id, "capabilities");
    check_tokens(s.roles, s.id, "roles");
    check_keys(s.attributes, s.id, "attributes");
    auto [it, inserted] = subjects_.insert_or_assign(s.id, std::move(s));
    (void)inserted;
    return it->first;
}

const std::string& BibStore::put_entity(ObjectRecord o) {
    claim_id(o.id, EntityType::Object);
    if (o.object_class.empty() || !is_valid_id(o.object_class))
        throw Error(o.id + ": object class '" + o.object_class + "' is malformed");
    check_names(o.affordances, o.id, "affordances");
    check_tokens(o.tags, o.id, "tags");
    check_keys(o.attributes, o.id, "attributes");
    check_keys(o.state, o.id, "state");
    auto [it, inserted] = objects_.insert_or_assign(o.id, std::move(o));
    (void)inserted;
    return it->first;
}

const std::string& BibStore::put_entity(ForecastModel m) {
    claim_id(m.id, EntityType::Model);
    if (m.direction != CmpOp::Lt && m.direction != CmpOp::Le && m.direction != CmpOp::Gt &&
        m.direction != CmpOp::Ge)
        throw Error(m.id + ": model direction must be one of < <= > >=");
    if (m.kind == ModelKind::LinearExtrapolation && m.window < 2)
        throw Error(m.id + ": linear model window must be >= 2");
    auto [it, inserted] = models_.insert_or_assign(m.id, std::move(m));
    (void)inserted;
    return it->first;
}

void BibStore::put_rule(ValidityRule r) {
    if (r.id.empty() || !is_valid_id(r.id)) throw Error("rule id '" + r.id + "' is malformed");
    rules_.insert_or_assign(r.id, std::move(r));
}

EventRecord& BibStore::push_event(EventRecord ev) {
    ev.id = next_event_++;
    feed_.push_back(std::move(ev));
    return feed_.back();
}

EventRecord BibStore::update_object_state(const std::string& object_id, const AttrMap& new_values,
                                          std::optional<BehaviorId> cause, Tick time) {
    auto it = objects_.find(object_id);
    if (it == objects_.end()) throw Error("unknown object: " + object_id);
    if (new_values.empty()) throw Error("state update for " + object_id + " has an empty delta");
    check_keys(new_values, object_id, "state delta");
    ObjectRecord& obj = it->second;
    EventRecord ev;
    ev.kind = EventKind::ObjectChanged;
    ev.entity_id = object_id;
    ev.tags = obj.tags;
    ev.cause_behavior_id = cause;
    ev.logical_time = time;
    for (const auto& [path, value] : new_values) {
        std::optional<Literal> old;
        auto sit = obj.state.find(path);
        if (sit != obj.state.end()) old = sit->second;
        ev.delta[path] = {old, value};
        obj.state[path] = value;
    }
    return push_event(std::move(ev));
}

EventRecord BibStore::append_external_event(const std::string& entity_id, const AttrMap& payload,
                                            NameSet tags, std::optional<BehaviorId> cause,
                                            Tick time) {
    EventRecord ev;
    ev.kind = EventKind::ExternalSignal;
    ev.entity_id = entity_id;
    ev.tags = std::move(tags);
    ev.cause_behavior_id = cause;
    ev.logical_time = time;
    for (const auto& [path, value] : payload) ev.delta[path] = {std::nullopt, value};
    return push_event(std::move(ev));
}

BehaviorId BibStore::append_behavior(BehaviorRecord rec) {
    auto sit = subjects_.find(rec.subject_id);
    if (sit == subjects_.end())
        throw Error("behavior references unknown subject: " + rec.subject_id);
    auto oit = objects_.find(rec.object_id);
    if (oit == objects_.end()) throw Error("behavior references unknown object: " + rec.object_id);
    if (rec.caused_by) {
        if (*rec.caused_by < 1 || *rec.caused_by >= next_behavior_)
            throw Error("behavior caused_by " + std::to_string(*rec.caused_by) +
                        " does not resolve");
        const BehaviorRecord& parent = log_[static_cast<std::size_t>(*rec.caused_by) - 1];
        if (rec.cascade_depth != parent.cascade_depth + 1)
            throw Error("cascade_depth must be parent depth + 1");
    } else if (rec.cascade_depth != 0) {
        throw Error("externally initiated behaviors have cascade_depth 0");
    }
    rec.id = next_behavior_++;
    EventRecord ev;
    ev.kind = EventKind::BehaviorRecorded;
    ev.entity_id = rec.object_id;
    ev.tags = oit->second.tags;
    ev.cause_behavior_id = rec.id;
    ev.logical_time = rec.logical_time;
    BehaviorId id = rec.id;
    log_.push_back(std::move(rec));
    push_event(std::move(ev));
    return id;
}

std::vector<BehaviorRecord> BibStore::query_behaviors(const BehaviorFilter& filter) const {
    std::vector<BehaviorRecord> out;
    for (const auto& rec : log_)
        if (filter.matches(rec)) out.push_back(rec);
    return out;
}

std::vector<EventRecord> BibStore::change_feed_since(EventId after) const {
    std::vector<EventRecord> out;
    if (after < 0) after = 0;
    // ids are 1..feed_.size() with no gaps
    for (std::size_t i = static_cast<std::size_t>(after); i < feed_.size(); ++i)
        out.push_back(feed_[i]);
    return out;
}

ModelOutput BibStore::evaluate_model(const std::string& model_id,
                                     const std::vector<SeriesPoint>& series) const {
    const ForecastModel* m = find_model(model_id);
    if (!m) throw Error("unknown model: " + model_id);
    return evaluate_forecast(*m, series);
}

ModelOutput evaluate_forecast(const ForecastModel& model, const std::vector<SeriesPoint>& series) {
    if (series.empty()) throw Error(model.id + ": series is empty");
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i].tick <= series[i - 1].tick)
            throw Error(model.id + ": series ticks must be strictly increasing");
    ModelOutput out;
    if (model.kind == ModelKind::Threshold) {
        out.projected_value = series.back().value;
        out.fired = cmp_holds(out.projected_value.compare(model.bound), model.direction);
        return out;
    }
    if (static_cast<int>(series.size()) < model.window)
        throw Error(model.id + ": series shorter than window (" +
                    std::to_string(series.size()) + " < " + std::to_string(model.window) + ")");
    std::size_t start = series.size() - static_cast<std::size_t>(model.window);
    double n = static_cast<double>(model.window);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = start; i < series.size(); ++i) {
        double x = static_cast<double>(series[i].tick);
        double y = series[i].value.to_double();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double denom = n * sxx - sx * sx;
    double slope = denom == 0 ? 0.0 : (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    double next_x = static_cast<double>(series.back().tick + 1);
    out.projected_value = Decimal::from_double(slope * next_x + intercept, 6);
    out.fired = cmp_holds(out.projected_value.compare(model.bound), model.direction);
    return out;
}

const SubjectRecord* BibStore::find_subject(const std::string& id) const {
    auto it = subjects_.find(id);
    return it == subjects_.end() ? nullptr : &it->second;
}

const ObjectRecord* BibStore::find_object(const std::string& id) const {
    auto it = objects_.find(id);
    return it == objects_.end() ? nullptr : &it->second;
}

const ForecastModel* BibStore::find_model(const std::string& id) const {
    auto it = models_.find(id);
    return it == models_.end() ? nullptr : &it->second;
}

const SubjectRecord& BibStore::subject(const std::string& id) const {
    const SubjectRecord* s = find_subject(id);
    if (!s) throw Error("unknown subject: " + id);
    return *s;
}

const ObjectRecord& BibStore::object(const std::string& id) const {
    const ObjectRecord* o = find_object(id);
    if (!o) throw Error("unknown object: " + id);
    return *o;
}

std::string BibStore::export_snapshot() const {
    std::ostringstream out;
    out << "bun-snapshot v1\n";
    out << "SUBJECTS\n";
    for (const auto& [id, s] : subjects_) out << render_subject_line(s) << "\n";
    out << "OBJECTS\n";
    for (const auto& [id, o] : objects_) out << render_object_line(o) << "\n";
    out << "MODELS\n";
    for (const auto& [id, m] : models_) out << render_model_line(m) << "\n";
    out << "RULES\n";
    for (const auto& [id, r] : rules_) out << render_rule_line(r) << "\n";
    out << "LOG\n";
    for (const auto& rec : log_) out << render_behavior_line(rec) << "\n";
    return out.str();
}

BibStore BibStore::import_snapshot(std::string_view text, const std::string& origin) {
    BibStore store;
    auto lines = nonblank_lines(text);
    if (lines.empty() || lines.front().second != "bun-snapshot v1")
        throw Error(origin + ": expected 'bun-snapshot v1' header");
    enum class Section { None, Subjects, Objects, Models, Rules, Log };
    Section section = Section::None;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto& [lineno, line] = lines[i];
        std::string where = origin + ":" + std::to_string(lineno);
        if (line == "SUBJECTS") { section = Section::Subjects; continue; }
        if (line == "OBJECTS") { section = Section::Objects; continue; }
        if (line == "MODELS") { section = Section::Models; continue; }
        if (line == "RULES") { section = Section::Rules; continue; }
        if (line == "LOG") { section = Section::Log; continue; }
        TokenStream ts(line, where);
        switch (section) {
            case Section::Subjects: store.put_entity(parse_subject_line(ts)); break;
            case Section::Objects: store.put_entity(parse_object_line(ts)); break;
            case Section::Models: store.put_entity(parse_model_line(ts)); break;
            case Section::Rules: register_rule(store, parse_rule_line(ts)); break;
            case Section::Log: {
                BehaviorRecord rec = parse_behavior_line(ts);
                if (rec.id != store.next_behavior_)
                    throw Error(where + ": log ids must be contiguous from 1");
                store.log_.push_back(std::move(rec));
                ++store.next_behavior_;
                break;
            }
            case Section::None:
                throw Error(where + ": content before any section header");
        }
        if (!ts.at_end()) ts.fail("trailing input");
    }
    return store;
}

}  // namespace bun
