// Compares the parallel analyzer kernels against the serial references on a
// synthetic log: same outputs, wall-clock side by side.

#include <chrono>
#include <cstdio>
#include <random>

#include "bun/analyzer.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Synthetic {
    bun::BibStore store;
    std::vector<bun::BehaviorRecord> log;
    std::vector<bun::EventRecord> feed;
};

Synthetic make_synthetic(int subjects, int objects, int behaviors, std::uint64_t seed) {
    Synthetic syn;
    std::mt19937_64 rng(seed);
    const char* ops[] = {"read_item", "write_item", "move_item", "tag_item"};
    for (int s = 0; s < subjects; ++s) {
        bun::SubjectRecord rec;
        rec.id = "agent" + std::to_string(s);
        for (const char* op : ops) rec.capabilities.insert(op);
        syn.store.put_entity(rec);
    }
    for (int o = 0; o < objects; ++o) {
        bun::ObjectRecord rec;
        rec.id = "item" + std::to_string(o);
        rec.object_class = o % 3 == 0 ? "Crate" : (o % 3 == 1 ? "Shelf" : "Cart");
        rec.state["counter"] = bun::Literal::of_int(0);
        for (const char* op : ops) rec.affordances.insert(op);
        syn.store.put_entity(rec);
    }
    bun::ValidityRule rule;
    rule.id = "counted";
    rule.subject_pred = bun::parse_predicate("(and)");
    rule.object_pred = bun::parse_predicate("(>= object.state.counter 0)");
    rule.op_context_pred = bun::parse_predicate("(>= context.logical_time 1)");
    bun::register_rule(syn.store, rule);

    bun::BibStore replica = syn.store;
    for (int i = 0; i < behaviors; ++i) {
        std::string subject = "agent" + std::to_string(rng() % static_cast<std::uint64_t>(subjects));
        std::string object = "item" + std::to_string(rng() % static_cast<std::uint64_t>(objects));
        bun::BehaviorRecord rec;
        rec.logical_time = i + 1;
        rec.subject_id = subject;
        rec.operation = ops[rng() % 4];
        rec.object_id = object;
        rec.context.values["logical_time"] = bun::Literal::of_int(rec.logical_time);
        rec.verdict.allow = true;
        rec.verdict.gate_passed = true;
        rec.outcome = bun::Outcome::Applied;
        std::optional<bun::Literal> old;
        auto& state = replica.object(object).state;
        auto it = state.find("counter");
        if (it != state.end()) old = it->second;
        bun::Literal next = bun::Literal::of_int(static_cast<std::int64_t>(i));
        rec.state_delta["counter"] = {old, next};
        bun::BehaviorId id = replica.append_behavior(rec);
        replica.update_object_state(object, {{"counter", next}}, id, rec.logical_time);
    }
    syn.log = replica.behavior_log();
    syn.feed = replica.event_feed();
    return syn;
}

}  // namespace

int main(int argc, char** argv) {
    int behaviors = argc > 1 ? std::atoi(argv[1]) : 200000;
    Synthetic syn = make_synthetic(64, 512, behaviors, 1234);
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled at build time\n");
#endif
    std::printf("synthetic log: %zu behaviors\n", syn.log.size());

    bun::ClassMap classes = bun::class_map_of(syn.store);

    auto t0 = Clock::now();
    bun::NGramModel serial_model = bun::fit_ngram_serial(syn.log, 3, classes);
    double fit_serial = ms_since(t0);
    t0 = Clock::now();
    bun::NGramModel parallel_model = bun::fit_ngram(syn.log, 3, classes);
    double fit_parallel = ms_since(t0);
    bool fit_match = serial_model.counts == parallel_model.counts &&
                     serial_model.totals == parallel_model.totals;
    std::printf("fit_ngram      serial %8.1f ms   parallel %8.1f ms   match=%s\n", fit_serial,
                fit_parallel, fit_match ? "yes" : "NO");

    t0 = Clock::now();
    bun::AnomalyReport serial_scan = bun::anomaly_scan_serial(syn.store, syn.log, syn.feed);
    double scan_serial = ms_since(t0);
    t0 = Clock::now();
    bun::AnomalyReport parallel_scan = bun::anomaly_scan(syn.store, syn.log, syn.feed);
    double scan_parallel = ms_since(t0);
    bool scan_match = serial_scan.envelope_violations == parallel_scan.envelope_violations &&
                      serial_scan.findings.size() == parallel_scan.findings.size();
    std::printf("anomaly_scan   serial %8.1f ms   parallel %8.1f ms   match=%s\n", scan_serial,
                scan_parallel, scan_match ? "yes" : "NO");
    std::printf("envelope violations: %lld (expected 0)\n",
                static_cast<long long>(parallel_scan.envelope_violations));
    return fit_match && scan_match ? 0 : 1;
}
