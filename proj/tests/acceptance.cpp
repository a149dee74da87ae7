// Acceptance suite: one scenario- or property-level criterion per check,
// one pass/fail line each. Exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>

#include "oracles.hpp"

using namespace bun;

namespace {

int failures = 0;
std::vector<std::string> notes;

void criterion(int number, const std::string& label, const std::function<void()>& body) {
    notes.clear();
    try {
        body();
        std::printf("PASS  criterion %d: %s\n", number, label.c_str());
    } catch (const std::exception& e) {
        ++failures;
        std::printf("FAIL  criterion %d: %s\n      %s\n", number, label.c_str(), e.what());
    }
    for (const auto& n : notes) std::printf("      %s\n", n.c_str());
}

void require(bool cond, const std::string& what) {
    if (!cond) throw std::runtime_error("requirement failed: " + what);
}

Scenario bundled(const char* file) {
    return load_scenario_file(std::string(BUN_SCENARIO_DIR) + "/" + file);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// --- criterion 1: validity-oracle equivalence --------------------------------

void validity_oracle_equivalence() {
    auto start = std::chrono::steady_clock::now();
    oracle::Gen gen(190);
    const int trials = 10000;
    for (int trial = 0; trial < trials; ++trial) {
        SubjectRecord s = gen.subject("s1");
        ObjectRecord o = gen.object("o1");
        std::map<std::string, ValidityRule> rules;
        std::vector<ValidityRule> rule_list;
        std::int64_t nrules = gen.pick(6);  // up to 5 rules
        for (std::int64_t r = 0; r < nrules; ++r) {
            ValidityRule rule;
            rule.id = "r" + std::to_string(r);
            rule.op_pattern = gen.coin() ? "*" : "op" + std::to_string(gen.pick(4));
            rule.class_pattern = gen.coin() ? "*" : (gen.coin() ? "Crate" : "Shelf");
            // up to 6 atoms across the three predicates
            rule.subject_pred = gen.scoped_predicate(EntityNs::Subject, static_cast<int>(gen.pick(3)));
            rule.object_pred = gen.scoped_predicate(EntityNs::Object, static_cast<int>(gen.pick(3)));
            rule.op_context_pred = gen.scoped_predicate(EntityNs::Op, static_cast<int>(gen.pick(3)));
            rules[rule.id] = rule;
            rule_list.push_back(rule);
        }
        std::string operation = "op" + std::to_string(gen.pick(4));
        AttrMap args;
        if (gen.coin()) args["amount"] = gen.literal();
        ContextInfo ctx;
        ctx.values["logical_time"] = Literal::of_int(gen.pick(30));
        if (gen.coin()) ctx.tags.insert(gen.safe_word());

        Verdict got = check_validity_resolved(s, o, operation, args, ctx, rules);
        bool want = oracle::o_check_validity(s, o, operation, args, ctx, rule_list);
        require(got.allow == want, "verdict mismatch at trial " + std::to_string(trial));
    }
    double elapsed = seconds_since(start);
    require(elapsed < 10.0, "runtime " + std::to_string(elapsed) + "s exceeds 10s");
    notes.push_back(std::to_string(trials) + " randomized pairs in " + std::to_string(elapsed) +
                    "s");
}

// --- criterion 2: determinism ------------------------------------------------

void determinism() {
    auto start = std::chrono::steady_clock::now();
    for (const char* file :
         {"traffic.bun", "transformer.bun", "embargo.bun", "pingpong.bun", "failover.bun"}) {
        Scenario sc = bundled(file);
        RunResult a = run_scenario(sc, 200);
        RunResult b = run_scenario(sc, 200);
        require(export_behavior_log(sc.name, sc.seed, a.log) ==
                    export_behavior_log(sc.name, sc.seed, b.log),
                std::string(file) + " behavior log differs");
        require(export_event_feed(sc.name, sc.seed, a.feed) ==
                    export_event_feed(sc.name, sc.seed, b.feed),
                std::string(file) + " event feed differs");
        require(export_decisions(sc.name, sc.seed, a.decisions) ==
                    export_decisions(sc.name, sc.seed, b.decisions),
                std::string(file) + " decisions differ");
    }
    double elapsed = seconds_since(start);
    require(elapsed < 5.0, "runtime " + std::to_string(elapsed) + "s exceeds 5s");
    notes.push_back("five scenarios, double runs, byte-identical in " + std::to_string(elapsed) +
                    "s");
}

// --- criterion 3: traffic scenario fidelity ----------------------------------

void traffic_fidelity() {
    RunResult r = run_scenario(bundled("traffic.bun"), 200);
    require(r.quiescent, "traffic run did not quiesce");
    const BehaviorRecord* accident = nullptr;
    for (const auto& rec : r.log)
        if (rec.operation == "report_incident") accident = &rec;
    require(accident != nullptr, "accident-recording behavior missing");
    int depth1 = 0;
    for (const auto& rec : r.log) {
        if (rec.cascade_depth != 1) continue;
        ++depth1;
        require(rec.caused_by == accident->id, "depth-1 behavior with foreign cause");
    }
    require(depth1 == 6, "expected 6 depth-1 behaviors, saw " + std::to_string(depth1));
    for (const auto& rec : r.log) {
        require(rec.subject_id != "vehicle6" && rec.subject_id != "vehicle7",
                "out-of-scope vehicle acted");
    }
    notes.push_back("6 coordinated reactions, all caused by behavior " +
                    std::to_string(accident->id) + ", zero out-of-scope");
}

// --- criterion 4: oscillation governance -------------------------------------

void oscillation_governance() {
    RunResult r = run_scenario(bundled("pingpong.bun"), 200);
    require(r.quiescent, "pingpong did not quiesce");
    int fired = 0, depth_exceeded = 0;
    for (const auto& d : r.decisions) {
        if (d.reason == FireReason::Fired) ++fired;
        if (d.reason == FireReason::DepthExceeded) ++depth_exceeded;
    }
    require(depth_exceeded == 1,
            "expected exactly one depth_exceeded, saw " + std::to_string(depth_exceeded));
    // chain length: caused_by edges along the single cascade
    int edges = 0, max_depth = 0;
    for (const auto& rec : r.log) {
        if (rec.caused_by) ++edges;
        max_depth = std::max(max_depth, rec.cascade_depth);
    }
    require(edges == 4 && max_depth == 4, "chain length is not exactly 4");

    RunResult d = run_scenario(bundled("transformer.bun"), 200);
    std::vector<Tick> fired_at;
    for (const auto& dec : d.decisions)
        if (dec.reason == FireReason::Fired) fired_at.push_back(dec.tick);
    require(fired_at.size() == 2, "expected one firing per 10-tick window over 20 repeats, saw " +
                                      std::to_string(fired_at.size()));
    require(fired_at[1] - fired_at[0] == 10, "second firing not at the window boundary");
    notes.push_back("chain 4 + one depth_exceeded; dedup: fired at ticks " +
                    std::to_string(fired_at[0]) + " and " + std::to_string(fired_at[1]));
}

// --- criterion 5: policy envelope soundness ----------------------------------

void envelope_soundness() {
    for (const char* file : {"traffic.bun", "transformer.bun", "embargo.bun", "pingpong.bun",
                             "failover.bun", "mutex.bun", "timeout.bun"}) {
        Scenario sc = bundled(file);
        Simulator sim(sc);
        BibStore initial = sim.store();
        RunResult r = sim.run(sc.max_ticks ? *sc.max_ticks : 200);
        AnomalyReport report = anomaly_scan(initial, r.log, r.feed);
        require(report.envelope_violations == 0,
                std::string(file) + ": clean run reported violations");
    }
    Scenario sc = bundled("embargo.bun");
    Simulator sim(sc);
    BibStore initial = sim.store();
    RunResult r = sim.run(200);
    bool corrupted = false;
    for (auto& rec : r.log) {
        if (rec.outcome == Outcome::Applied && rec.operation == "release_document") {
            rec.subject_id = "clerk1";
            corrupted = true;
        }
    }
    require(corrupted, "no applied release to corrupt");
    AnomalyReport report = anomaly_scan(initial, r.log, r.feed);
    require(report.envelope_violations == 1, "expected exactly one violation, saw " +
                                                 std::to_string(report.envelope_violations));
    require(report.findings.size() == 1 && report.findings[0].score == 1.0,
            "violation score is not 1.0");
    notes.push_back("7 clean scenario scans; injected corruption flagged at score 1.0");
}

// --- criterion 6: mutex property ----------------------------------------------

void mutex_property() {
    RunResult r = run_scenario(bundled("mutex.bun"), 5);
    std::map<Tick, int> applied, mutex_denied;
    for (const auto& rec : r.log) {
        if (rec.outcome == Outcome::Applied && !rec.state_delta.empty())
            ++applied[rec.logical_time];
        if (rec.deny_reason == "mutex") ++mutex_denied[rec.logical_time];
    }
    for (Tick t = 1; t <= 5; ++t) {
        require(applied[t] == 1, "tick " + std::to_string(t) + ": applied " +
                                     std::to_string(applied[t]) + " != 1");
        require(mutex_denied[t] == 9, "tick " + std::to_string(t) + ": mutex denials " +
                                          std::to_string(mutex_denied[t]) + " != 9");
    }
    notes.push_back("5 contested ticks, each 1 applied + 9 mutex denials");
}

// --- criterion 7: predictor oracle ---------------------------------------------

void predictor_oracle() {
    oracle::Gen gen(2025);
    const char* subjects[] = {"s1", "s2", "s3"};
    for (int trial = 0; trial < 1000; ++trial) {
        BibStore store;
        for (const char* id : subjects) {
            SubjectRecord s;
            s.id = id;
            s.capabilities = {"opA", "opB", "opC", "opD"};
            store.put_entity(s);
        }
        const char* objs[][2] = {{"oa", "Alpha"}, {"ob", "Beta"}, {"oc", "Gamma"}, {"od", "Delta"}};
        for (const auto& spec : objs) {
            ObjectRecord o;
            o.id = spec[0];
            o.object_class = spec[1];
            o.affordances = {"opA", "opB", "opC", "opD"};
            store.put_entity(o);
        }
        std::int64_t len = 1 + gen.pick(20);
        for (std::int64_t i = 0; i < len; ++i) {
            char action = static_cast<char>('A' + gen.pick(4));
            BehaviorRecord rec;
            rec.logical_time = i + 1;
            rec.subject_id = subjects[gen.pick(3)];
            rec.operation = std::string("op") + action;
            rec.object_id = std::string("o") + static_cast<char>(action - 'A' + 'a');
            rec.verdict.allow = true;
            rec.verdict.gate_passed = true;
            rec.outcome = Outcome::Applied;
            store.append_behavior(rec);
        }
        ClassMap classes = class_map_of(store);
        NGramModel model = fit_ngram(store.behavior_log(), 2, classes);
        auto sequences = subject_sequences(store.behavior_log(), classes);
        std::vector<std::vector<ActionKey>> seq_list;
        for (const auto& [sid, seq] : sequences) seq_list.push_back(seq);
        for (const auto& [sid, seq] : sequences) {
            auto got = predict_next(model, seq);
            auto want = oracle::o_bigram_distribution(seq_list, seq, 2);
            require(got.size() == want.size(), "distribution support mismatch");
            double sum = 0;
            for (const auto& [k, p] : got) {
                auto it = want.find(k);
                require(it != want.end(), "unexpected key in distribution");
                require(std::abs(p - it->second) <= 1e-9, "probability differs beyond 1e-9");
                sum += p;
            }
            require(std::abs(sum - 1.0) <= 1e-9, "distribution does not sum to 1");
        }
    }
    notes.push_back("1000 fuzzed logs (length <= 20), bigram oracle agreement at 1e-9");
}

// --- criterion 8: negotiation timeout ------------------------------------------

void negotiation_timeout() {
    RunResult r = run_scenario(bundled("timeout.bun"), 200);
    require(r.quiescent, "timeout scenario did not quiesce");
    const BehaviorRecord* request = nullptr;
    for (const auto& rec : r.log)
        if (rec.operation == "request_review") request = &rec;
    require(request != nullptr, "request behavior missing");
    const EventRecord* directive = nullptr;
    for (const auto& ev : r.feed)
        if (ev.delta.count("reassigned_to")) directive = &ev;
    require(directive != nullptr, "no reassignment directive");
    require(directive->logical_time == request->logical_time + 5,
            "directive at tick " + std::to_string(directive->logical_time) + ", expected " +
                std::to_string(request->logical_time + 5));
    const BehaviorRecord* completion = nullptr;
    for (const auto& rec : r.log)
        if (rec.operation == "complete_review" && rec.subject_id == "reviewerC") completion = &rec;
    require(completion != nullptr, "fallback completion missing");
    require(completion->logical_time >= directive->logical_time,
            "completion precedes the directive");
    require(completion->outcome == Outcome::Applied, "completion was not applied");
    notes.push_back("directive at request+5 (tick " + std::to_string(directive->logical_time) +
                    "), fallback completion at tick " + std::to_string(completion->logical_time));
}

// --- criterion 9: predicate round-trip ------------------------------------------

void predicate_round_trip() {
    oracle::Gen gen(90210);
    for (int i = 0; i < 10000; ++i) {
        PredicatePtr e = gen.predicate(3);
        std::string once = print_predicate(e);
        PredicatePtr back = parse_predicate(once);
        std::string twice = print_predicate(back);
        require(once == twice, "print->parse->print not a fixed point: " + once);
        require(same_structure(*e, *back), "reparsed AST differs structurally: " + once);
    }
    notes.push_back("10000 random ASTs survive print -> parse -> print unchanged");
}

}  // namespace

int main() {
    criterion(1, "validity verdicts match the unindexed brute-force oracle",
              validity_oracle_equivalence);
    criterion(2, "bundled scenarios export byte-identically across same-seed runs", determinism);
    criterion(3, "traffic: one event, six coordinated depth-1 behaviors, tag scoping holds",
              traffic_fidelity);
    criterion(4, "oscillation governance: depth cap and dedup window", oscillation_governance);
    criterion(5, "policy envelope soundness under re-check, with injected corruption",
              envelope_soundness);
    criterion(6, "write mutex: one applied and nine denials per contested tick", mutex_property);
    criterion(7, "next-action predictions equal exhaustive bigram counting", predictor_oracle);
    criterion(8, "negotiation timeout reassigns at request+5 and the fallback completes",
              negotiation_timeout);
    criterion(9, "predicate print/parse round trip is a fixed point", predicate_round_trip);
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}
