#include "bun/analyzer.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bun {

ActionKey start_marker() { return {"^", "^"}; }

ClassMap class_map_of(const BibStore& store) {
    ClassMap out;
    for (const auto& [id, obj] : store.objects()) out[id] = obj.object_class;
    return out;
}

const char* to_string(AnomalyKind k) {
    switch (k) {
        case AnomalyKind::EnvelopeViolation: return "envelope_violation";
        case AnomalyKind::NeverSeenTransition: return "never_seen_transition";
    }
    return "?";
}

namespace {

ActionKey key_of(const BehaviorRecord& rec, const ClassMap& class_of) {
    auto it = class_of.find(rec.object_id);
    return {rec.operation, it == class_of.end() ? std::string() : it->second};
}

std::vector<ActionKey> context_of(const std::vector<ActionKey>& seq, std::size_t upto, int n) {
    // the n-1 keys before position `upto`, left-padded with the start marker
    std::vector<ActionKey> ctx;
    int need = n - 1;
    ctx.reserve(static_cast<std::size_t>(need));
    for (int k = need; k >= 1; --k) {
        std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(upto) - k;
        ctx.push_back(idx < 0 ? start_marker() : seq[static_cast<std::size_t>(idx)]);
    }
    return ctx;
}

void tally_sequence(NGramModel& model, const std::vector<ActionKey>& seq, int n) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
        std::vector<ActionKey> ctx = context_of(seq, i, n);
        ++model.counts[ctx][seq[i]];
        ++model.totals[ctx];
        model.vocabulary.insert(seq[i]);
    }
}

void merge_model(NGramModel& into, const NGramModel& part) {
    for (const auto& [ctx, nexts] : part.counts)
        for (const auto& [key, count] : nexts) into.counts[ctx][key] += count;
    for (const auto& [ctx, total] : part.totals) into.totals[ctx] += total;
    into.vocabulary.insert(part.vocabulary.begin(), part.vocabulary.end());
}

}  // namespace

std::map<std::string, std::vector<ActionKey>> subject_sequences(
    const std::vector<BehaviorRecord>& log, const ClassMap& class_of) {
    std::map<std::string, std::vector<ActionKey>> out;
    for (const auto& rec : log) {
        if (rec.outcome != Outcome::Applied) continue;
        out[rec.subject_id].push_back(key_of(rec, class_of));
    }
    return out;
}

NGramModel fit_ngram_serial(const std::vector<BehaviorRecord>& log, int n,
                            const ClassMap& class_of) {
    if (n < 1) throw Error("n-gram order must be >= 1");
    if (log.empty()) throw Error("cannot fit a model on an empty log");
    NGramModel model;
    model.order = n;
    for (const auto& [subject, seq] : subject_sequences(log, class_of)) {
        (void)subject;
        tally_sequence(model, seq, n);
    }
    return model;
}

NGramModel fit_ngram(const std::vector<BehaviorRecord>& log, int n, const ClassMap& class_of) {
    if (n < 1) throw Error("n-gram order must be >= 1");
    if (log.empty()) throw Error("cannot fit a model on an empty log");
    auto grouped = subject_sequences(log, class_of);
    std::vector<const std::vector<ActionKey>*> seqs;
    seqs.reserve(grouped.size());
    for (const auto& [subject, seq] : grouped) {
        (void)subject;
        seqs.push_back(&seq);
    }
    // one partial model per thread; the merged counts are sums over disjoint
    // subjects, so the result does not depend on the work assignment
    int nthreads = 1;
#ifdef _OPENMP
    nthreads = omp_get_max_threads();
#endif
    std::vector<NGramModel> parts(static_cast<std::size_t>(nthreads));
#pragma omp parallel
    {
        int tid = 0;
#ifdef _OPENMP
        tid = omp_get_thread_num();
#endif
        NGramModel& part = parts[static_cast<std::size_t>(tid)];
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(seqs.size()); ++i)
            tally_sequence(part, *seqs[static_cast<std::size_t>(i)], n);
    }
    NGramModel model;
    model.order = n;
    for (const auto& part : parts) merge_model(model, part);
    return model;
}

namespace {

std::vector<ActionKey> history_context(const NGramModel& model,
                                       const std::vector<ActionKey>& history) {
    std::vector<ActionKey> ctx;
    int need = model.order - 1;
    for (int k = need; k >= 1; --k) {
        std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(history.size()) - k;
        ctx.push_back(idx < 0 ? start_marker() : history[static_cast<std::size_t>(idx)]);
    }
    return ctx;
}

}  // namespace

std::vector<std::pair<ActionKey, double>> predict_next(const NGramModel& model,
                                                       const std::vector<ActionKey>& history) {
    std::vector<std::pair<ActionKey, double>> out;
    std::vector<ActionKey> ctx = history_context(model, history);
    auto it = model.counts.find(ctx);
    if (it == model.counts.end() || model.totals.at(ctx) == 0) {
        if (model.vocabulary.empty()) return out;
        double p = 1.0 / static_cast<double>(model.vocabulary.size());
        for (const auto& key : model.vocabulary) out.emplace_back(key, p);
    } else {
        double total = static_cast<double>(model.totals.at(ctx));
        for (const auto& [key, count] : it->second)
            out.emplace_back(key, static_cast<double>(count) / total);
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    return out;
}

double transition_probability(const NGramModel& model, const std::vector<ActionKey>& history,
                              const ActionKey& next) {
    std::vector<ActionKey> ctx = history_context(model, history);
    auto it = model.counts.find(ctx);
    if (it == model.counts.end() || model.totals.at(ctx) == 0) {
        return model.vocabulary.empty() ? 0.0
                                        : 1.0 / static_cast<double>(model.vocabulary.size());
    }
    auto nit = it->second.find(next);
    if (nit == it->second.end()) return 0.0;
    return static_cast<double>(nit->second) / static_cast<double>(model.totals.at(ctx));
}

namespace {

struct ReplayFrame {
    const BehaviorRecord* rec;
    ObjectRecord object_before;  // object as of this behavior's execution
};

void apply_delta(ObjectRecord& obj, const DeltaMap& delta) {
    for (const auto& [path, change] : delta) obj.state[path] = change.second;
}

void cross_check_feed(const std::vector<BehaviorRecord>& log,
                      const std::vector<EventRecord>& feed) {
    // every object_changed event caused by a behavior must match that
    // behavior's recorded state delta
    for (const auto& ev : feed) {
        if (ev.kind != EventKind::ObjectChanged || !ev.cause_behavior_id) continue;
        auto idx = static_cast<std::size_t>(*ev.cause_behavior_id) - 1;
        if (idx >= log.size())
            throw Error("run artifacts mismatch: event " + std::to_string(ev.id) +
                        " cites behavior " + std::to_string(*ev.cause_behavior_id) +
                        " outside the log");
        const BehaviorRecord& rec = log[idx];
        if (rec.object_id != ev.entity_id || rec.state_delta != ev.delta)
            throw Error("run artifacts mismatch: event " + std::to_string(ev.id) +
                        " does not match behavior " + std::to_string(rec.id));
    }
}

AnomalyReport scan_impl(const BibStore& initial, const std::vector<BehaviorRecord>& log,
                        const std::vector<EventRecord>& feed, const ScanOptions& opts,
                        bool parallel) {
    cross_check_feed(log, feed);
    AnomalyReport report;
    report.behaviors_checked = static_cast<std::int64_t>(log.size());

    // serial replay pass: object snapshot per applied behavior
    std::map<std::string, ObjectRecord> objects;
    for (const auto& [id, obj] : initial.objects()) objects[id] = obj;
    std::vector<ReplayFrame> frames;
    frames.reserve(log.size());
    for (const auto& rec : log) {
        if (rec.outcome != Outcome::Applied) continue;
        auto it = objects.find(rec.object_id);
        if (it == objects.end())
            throw Error("run artifacts mismatch: behavior " + std::to_string(rec.id) +
                        " touches unknown object " + rec.object_id);
        frames.push_back({&rec, it->second});
        apply_delta(it->second, rec.state_delta);
    }

    std::vector<int> violated(frames.size(), 0);
    auto check_one = [&](std::size_t i) {
        const BehaviorRecord& rec = *frames[i].rec;
        const SubjectRecord* subject = initial.find_subject(rec.subject_id);
        if (!subject) {
            violated[i] = 1;
            return;
        }
        Verdict v = check_validity_resolved(*subject, frames[i].object_before, rec.operation,
                                            rec.args, rec.context, initial.rules());
        if (!v.allow) violated[i] = 1;
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(frames.size()); ++i)
            check_one(static_cast<std::size_t>(i));
    } else {
        for (std::size_t i = 0; i < frames.size(); ++i) check_one(i);
    }
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (!violated[i]) continue;
        AnomalyFinding f;
        f.behavior_id = frames[i].rec->id;
        f.kind = AnomalyKind::EnvelopeViolation;
        f.score = 1.0;
        f.detail = "re-check fails at tick " + std::to_string(frames[i].rec->logical_time);
        report.findings.push_back(std::move(f));
        ++report.envelope_violations;
    }

    if (opts.baseline_log && !opts.baseline_log->empty()) {
        ClassMap classes = class_map_of(initial);
        NGramModel baseline = parallel ? fit_ngram(*opts.baseline_log, opts.ngram_order, classes)
                                       : fit_ngram_serial(*opts.baseline_log, opts.ngram_order,
                                                          classes);
        auto sequences = subject_sequences(log, classes);
        // map each applied record to its position in its subject's sequence
        std::map<std::string, std::vector<BehaviorId>> ids_by_subject;
        for (const auto& rec : log)
            if (rec.outcome == Outcome::Applied) ids_by_subject[rec.subject_id].push_back(rec.id);
        struct Hit {
            BehaviorId id;
            double p;
            std::string detail;
        };
        std::vector<Hit> hits;
        for (const auto& [subject, seq] : sequences) {
            const auto& ids = ids_by_subject[subject];
            for (std::size_t i = 0; i < seq.size(); ++i) {
                std::vector<ActionKey> history(seq.begin(),
                                               seq.begin() + static_cast<std::ptrdiff_t>(i));
                double p = transition_probability(baseline, history, seq[i]);
                if (p < opts.theta)
                    hits.push_back({ids[i], p, subject + ": " + seq[i].str()});
            }
        }
        std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.id < b.id; });
        for (const auto& h : hits) {
            AnomalyFinding f;
            f.behavior_id = h.id;
            f.kind = AnomalyKind::NeverSeenTransition;
            f.score = 1.0 - h.p;
            f.detail = h.detail;
            report.findings.push_back(std::move(f));
            ++report.rare_transitions;
        }
    }
    return report;
}

}  // namespace

AnomalyReport anomaly_scan(const BibStore& initial, const std::vector<BehaviorRecord>& log,
                           const std::vector<EventRecord>& feed, const ScanOptions& opts) {
    return scan_impl(initial, log, feed, opts, true);
}

AnomalyReport anomaly_scan_serial(const BibStore& initial, const std::vector<BehaviorRecord>& log,
                                  const std::vector<EventRecord>& feed, const ScanOptions& opts) {
    return scan_impl(initial, log, feed, opts, false);
}

CascadeStats cascade_stats(const std::vector<BehaviorRecord>& log,
                           const std::vector<FiringDecision>& decisions) {
    CascadeStats stats;
    std::map<BehaviorId, std::int64_t> children;
    std::map<BehaviorId, BehaviorId> root_of;
    for (const auto& rec : log) {
        ++stats.depth_histogram[rec.cascade_depth];
        if (rec.caused_by) {
            ++children[*rec.caused_by];
            auto it = root_of.find(*rec.caused_by);
            root_of[rec.id] = it == root_of.end() ? *rec.caused_by : it->second;
        } else {
            root_of[rec.id] = rec.id;
        }
    }
    for (const auto& rec : log) {
        auto fanout = children.find(rec.id);
        std::int64_t f = fanout == children.end() ? 0 : fanout->second;
        BehaviorId root = root_of[rec.id];
        auto& best = stats.max_fanout_by_root[root];
        best = std::max(best, f);
        stats.max_fanout = std::max(stats.max_fanout, f);
    }
    std::int64_t leaves = 0;
    std::int64_t depth_sum = 0;
    for (const auto& rec : log) {
        if (children.count(rec.id)) continue;
        ++leaves;
        depth_sum += rec.cascade_depth + 1;
    }
    stats.mean_chain_length =
        leaves == 0 ? 0.0 : static_cast<double>(depth_sum) / static_cast<double>(leaves);
    for (const auto& d : decisions) ++stats.trigger_counts[d.trigger_id][d.reason];
    return stats;
}

}  // namespace bun
