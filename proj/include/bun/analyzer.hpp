#pragma once

#include "bun/simulator.hpp"

namespace bun {

// (operation, object class): generalizes across object instances.
struct ActionKey {
    std::string operation;
    std::string object_class;

    bool operator==(const ActionKey& rhs) const {
        return operation == rhs.operation && object_class == rhs.object_class;
    }
    bool operator<(const ActionKey& rhs) const {
        if (operation != rhs.operation) return operation < rhs.operation;
        return object_class < rhs.object_class;
    }
    std::string str() const { return operation + "/" + object_class; }
};

// Start-of-sequence padding marker.
ActionKey start_marker();

using ClassMap = std::map<std::string, std::string>;  // object id -> class
ClassMap class_map_of(const BibStore& store);

struct NGramModel {
    int order = 2;
    std::map<std::vector<ActionKey>, std::map<ActionKey, std::int64_t>> counts;
    std::map<std::vector<ActionKey>, std::int64_t> totals;
    std::set<ActionKey> vocabulary;
};

// Per-subject applied-behavior sequences in log order; keys per class_of.
std::map<std::string, std::vector<ActionKey>> subject_sequences(
    const std::vector<BehaviorRecord>& log, const ClassMap& class_of);

// Tallies every length-n window per subject, padding short contexts with the
// start marker. Parallel over subjects; the merge order is fixed, so the
// result is identical to fit_ngram_serial.
NGramModel fit_ngram(const std::vector<BehaviorRecord>& log, int n, const ClassMap& class_of);
NGramModel fit_ngram_serial(const std::vector<BehaviorRecord>& log, int n,
                            const ClassMap& class_of);

// Normalized next-action distribution for the history's last n-1 keys.
// Unseen context falls back to uniform over the vocabulary. Sorted by
// probability desc, then key asc.
std::vector<std::pair<ActionKey, double>> predict_next(const NGramModel& model,
                                                       const std::vector<ActionKey>& history);

// Probability of `next` following `history` under the model (same fallback).
double transition_probability(const NGramModel& model, const std::vector<ActionKey>& history,
                              const ActionKey& next);

enum class AnomalyKind { EnvelopeViolation, NeverSeenTransition };
const char* to_string(AnomalyKind k);

struct AnomalyFinding {
    BehaviorId behavior_id = 0;
    AnomalyKind kind = AnomalyKind::EnvelopeViolation;
    double score = 0.0;  // in [0, 1]
    std::string detail;
};

struct AnomalyReport {
    std::vector<AnomalyFinding> findings;
    std::int64_t behaviors_checked = 0;
    std::int64_t envelope_violations = 0;
    std::int64_t rare_transitions = 0;
};

struct ScanOptions {
    const std::vector<BehaviorRecord>* baseline_log = nullptr;  // enables rare-transition scan
    double theta = 0.05;
    int ngram_order = 2;
};

// Replays the run against `initial` (entities, rules, pre-run object states)
// and re-checks every applied behavior at its execution snapshot; flags any
// that no longer pass (score 1.0). With a baseline log, also flags applied
// transitions whose probability under the baseline model falls below theta
// (score 1 - p). The feed must belong to the same run: object_changed events
// are cross-checked against the log's state deltas.
AnomalyReport anomaly_scan(const BibStore& initial, const std::vector<BehaviorRecord>& log,
                           const std::vector<EventRecord>& feed, const ScanOptions& opts = {});
AnomalyReport anomaly_scan_serial(const BibStore& initial, const std::vector<BehaviorRecord>& log,
                                  const std::vector<EventRecord>& feed,
                                  const ScanOptions& opts = {});

struct CascadeStats {
    std::map<int, std::int64_t> depth_histogram;           // mass == log size
    std::map<BehaviorId, std::int64_t> max_fanout_by_root; // widest node per tree
    std::int64_t max_fanout = 0;
    double mean_chain_length = 0.0;  // mean over leaves of depth+1
    std::map<std::string, std::map<FireReason, std::int64_t>> trigger_counts;
};

CascadeStats cascade_stats(const std::vector<BehaviorRecord>& log,
                           const std::vector<FiringDecision>& decisions);

}  // namespace bun
