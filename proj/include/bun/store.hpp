#pragma once

#include "bun/policy.hpp"

namespace bun {

// The Behavioral Information Base: single authoritative store of subjects,
// objects, rules, forecast models, the append-only behavior log, and the
// monotone change feed.
//
// Concurrency contract: single writer, many readers. All mutation goes
// through one logical writer; readers observe a consistent prefix of the
// feed. The store itself carries no locks.
class BibStore {
public:
    // Registration replaces any previous entity with the same id and emits
    // no events; only state changes and behaviors are information flow.
    const std::string& put_entity(SubjectRecord s);
    const std::string& put_entity(ObjectRecord o);
    const std::string& put_entity(ForecastModel m);
    void put_rule(ValidityRule r);  // namespace-checked via register_rule

    // Merges delta path-wise into the object state and appends an
    // object_changed event carrying the object's tags.
    EventRecord update_object_state(const std::string& object_id, const AttrMap& new_values,
                                    std::optional<BehaviorId> cause, Tick time);

    // Environment input: recorded on the feed, mutates nothing.
    EventRecord append_external_event(const std::string& entity_id, const AttrMap& payload,
                                      NameSet tags, std::optional<BehaviorId> cause, Tick time);

    // Assigns the next behavior id, appends, and emits a behavior_recorded
    // event. Subject and object references must resolve.
    BehaviorId append_behavior(BehaviorRecord rec);

    std::vector<BehaviorRecord> query_behaviors(const BehaviorFilter& filter) const;
    std::vector<EventRecord> change_feed_since(EventId after) const;

    ModelOutput evaluate_model(const std::string& model_id,
                               const std::vector<SeriesPoint>& series) const;

    const SubjectRecord* find_subject(const std::string& id) const;
    const ObjectRecord* find_object(const std::string& id) const;
    const ForecastModel* find_model(const std::string& id) const;
    const SubjectRecord& subject(const std::string& id) const;
    const ObjectRecord& object(const std::string& id) const;

    const std::map<std::string, SubjectRecord>& subjects() const { return subjects_; }
    const std::map<std::string, ObjectRecord>& objects() const { return objects_; }
    const std::map<std::string, ForecastModel>& models() const { return models_; }
    const std::map<std::string, ValidityRule>& rules() const { return rules_; }
    const std::vector<BehaviorRecord>& behavior_log() const { return log_; }
    const std::vector<EventRecord>& event_feed() const { return feed_; }
    BehaviorId next_behavior_id() const { return next_behavior_; }

    // Versioned full snapshot: SUBJECTS / OBJECTS / MODELS / RULES / LOG.
    // Import restores entities and the log; the event feed starts fresh.
    std::string export_snapshot() const;
    static BibStore import_snapshot(std::string_view text, const std::string& origin = "snapshot");

private:
    enum class EntityType { Subject, Object, Model };
    void claim_id(const std::string& id, EntityType t);
    EventRecord& push_event(EventRecord ev);

    std::map<std::string, SubjectRecord> subjects_;
    std::map<std::string, ObjectRecord> objects_;
    std::map<std::string, ForecastModel> models_;
    std::map<std::string, ValidityRule> rules_;
    std::map<std::string, EntityType> id_kinds_;
    std::vector<BehaviorRecord> log_;
    std::vector<EventRecord> feed_;
    BehaviorId next_behavior_ = 1;
    EventId next_event_ = 1;
};

// Model math, independent of any store instance.
ModelOutput evaluate_forecast(const ForecastModel& model, const std::vector<SeriesPoint>& series);

}  // namespace bun
