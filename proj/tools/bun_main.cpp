// bun: run scenarios, check single behaviors, inspect logs, predict next
// actions, scan for anomalies, and re-emit canonical artifacts.
//
// Exit codes: 0 success / allow / quiescent, 1 load or usage error,
// 2 tick-limit stop, 3 deny.

#include <CLI11.hpp>

#include <iostream>

#include "bun/exports.hpp"

namespace {

constexpr bun::Tick kDefaultMaxTicks = 1000;

struct CommonFlags {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::int64_t max_ticks = 0;
    bool max_ticks_set = false;
};

bun::Tick effective_max_ticks(const bun::Scenario& sc, const CommonFlags& flags) {
    if (flags.max_ticks_set) return flags.max_ticks;
    if (sc.max_ticks) return *sc.max_ticks;
    return kDefaultMaxTicks;
}

int cmd_run(const std::string& path, const CommonFlags& flags, const std::string& out_dir,
            const std::string& format) {
    bun::Scenario sc = bun::load_scenario_file(path);
    for (const auto& w : sc.warnings) std::cerr << "warning: " << w << "\n";
    std::optional<std::uint64_t> seed_override;
    if (flags.seed_set) seed_override = flags.seed;
    std::uint64_t seed = seed_override ? *seed_override : sc.seed;

    bun::Simulator sim(sc, seed_override);
    const bun::BibStore initial = sim.store();
    bun::RunResult result = sim.run(effective_max_ticks(sc, flags));
    bun::RunPaths paths = bun::write_run_artifacts(out_dir, sc.name, seed, initial, result);
    std::string summary = bun::render_run_summary(sc.name, result, sim.store());
    if (format == "summary") {
        bun::write_file(paths.summary, summary);
        std::cout << summary;
    }
    std::cerr << "wrote " << paths.behaviors << ", " << paths.events << ", " << paths.decisions
              << ", " << paths.snapshot << "\n";
    return result.quiescent ? 0 : 2;
}

int cmd_check(const std::string& path, const std::string& subject, const std::string& operation,
              const std::string& object, bun::Tick tick,
              const std::vector<std::string>& arg_pairs, const std::vector<std::string>& ctx_tags) {
    bun::Scenario sc = bun::load_scenario_file(path);
    bun::Simulator sim(sc);  // materializes the initial store
    const bun::BibStore& store = sim.store();

    bun::CheckRequest req;
    req.subject_id = subject;
    req.operation = operation;
    req.object_id = object;
    req.context.values["logical_time"] = bun::Literal::of_int(tick);
    if (const bun::ObjectRecord* obj = store.find_object(object))
        req.context.tags = obj->tags;
    for (const auto& tag : ctx_tags) req.context.tags.insert(tag);
    for (const auto& pair : arg_pairs) {
        auto eq = pair.find('=');
        if (eq == std::string::npos) throw bun::Error("--arg expects key=value, got: " + pair);
        bun::TokenStream ts(pair.substr(eq + 1), "--arg " + pair.substr(0, eq));
        req.args[pair.substr(0, eq)] = bun::parse_literal(ts);
    }

    bun::Verdict verdict = bun::check_validity(store, req);
    std::cout << "verdict: " << (verdict.allow ? "allow" : "deny") << "\n";
    std::cout << "gate: " << (verdict.gate_passed ? "passed" : verdict.gate_reason) << "\n";
    for (const auto& ev : verdict.evaluated) {
        std::cout << "rule " << ev.rule_id << ": p1=" << (ev.subject_ok ? "true" : "false")
                  << " p2=" << (ev.object_ok ? "true" : "false")
                  << " p3=" << (ev.op_context_ok ? "true" : "false") << "\n";
    }
    if (verdict.first_failure) {
        std::cout << "first failure: rule " << verdict.first_failure->rule_id << " "
                  << to_string(verdict.first_failure->part) << "\n";
        for (const auto& atom : verdict.first_failure->failing_atoms)
            std::cout << "  false atom: " << atom << "\n";
    }
    return verdict.allow ? 0 : 3;
}

int cmd_inspect(const std::string& dir, const bun::BehaviorFilter& filter) {
    bun::RunArtifacts art = bun::load_run_dir(dir);
    for (const auto& rec : art.log)
        if (filter.matches(rec)) std::cout << bun::render_behavior_line(rec) << "\n";
    return 0;
}

int cmd_predict(const std::string& dir, const std::string& subject, int order, int top) {
    bun::RunArtifacts art = bun::load_run_dir(dir);
    bun::ClassMap classes = bun::class_map_of(art.initial);
    bun::NGramModel model = bun::fit_ngram(art.log, order, classes);
    auto sequences = bun::subject_sequences(art.log, classes);
    auto it = sequences.find(subject);
    std::vector<bun::ActionKey> history;
    if (it != sequences.end()) history = it->second;
    auto ranked = bun::predict_next(model, history);
    int shown = 0;
    char buf[64];
    for (const auto& [key, p] : ranked) {
        if (top > 0 && shown >= top) break;
        std::snprintf(buf, sizeof buf, "%.9f", p);
        std::cout << key.str() << " " << buf << "\n";
        ++shown;
    }
    return 0;
}

int cmd_scan(const std::string& test_dir, const std::string& baseline_dir, double theta,
             int order) {
    bun::RunArtifacts test = bun::load_run_dir(test_dir);
    bun::ScanOptions opts;
    opts.theta = theta;
    opts.ngram_order = order;
    std::vector<bun::BehaviorRecord> baseline_log;
    if (!baseline_dir.empty()) {
        bun::RunArtifacts baseline = bun::load_run_dir(baseline_dir);
        baseline_log = std::move(baseline.log);
        opts.baseline_log = &baseline_log;
    }
    bun::AnomalyReport report = bun::anomaly_scan(test.initial, test.log, test.feed, opts);
    char buf[64];
    for (const auto& f : report.findings) {
        std::snprintf(buf, sizeof buf, "%.6f", f.score);
        std::cout << f.behavior_id << " " << to_string(f.kind) << " " << buf << " " << f.detail
                  << "\n";
    }
    std::cout << "checked " << report.behaviors_checked << " behaviors, "
              << report.envelope_violations << " envelope violations, " << report.rare_transitions
              << " rare transitions\n";
    return 0;
}

int cmd_export(const std::string& dir, const std::string& what) {
    bun::RunArtifacts art = bun::load_run_dir(dir);
    if (what == "snapshot") {
        std::cout << art.initial.export_snapshot();
    } else if (what == "log") {
        std::cout << bun::export_behavior_log(art.name, art.seed, art.log);
    } else if (what == "feed") {
        std::cout << bun::export_event_feed(art.name, art.seed, art.feed);
    } else if (what == "decisions") {
        std::cout << bun::export_decisions(art.name, art.seed, art.decisions);
    } else {
        throw bun::Error("--what must be snapshot|log|feed|decisions");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavior-centric coordination engine"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string scenario_path, out_dir = "bun-out", format = "lines";
    auto* run = app.add_subcommand("run", "run a scenario and write artifacts");
    run->add_option("scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", flags.seed, "override the scenario seed")
        ->each([&](const std::string&) { flags.seed_set = true; });
    run->add_option("--max-ticks", flags.max_ticks, "tick limit")
        ->each([&](const std::string&) { flags.max_ticks_set = true; });
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--format", format, "lines|summary")
        ->check(CLI::IsMember({"lines", "summary"}));

    std::string subject, operation, object;
    std::int64_t tick = 0;
    std::vector<std::string> args_kv, ctx_tags;
    auto* check = app.add_subcommand("check", "validity verdict for one behavior");
    check->add_option("scenario", scenario_path, "scenario file")->required();
    check->add_option("--subject", subject)->required();
    check->add_option("--operation", operation)->required();
    check->add_option("--object", object)->required();
    check->add_option("--tick", tick, "context logical_time");
    check->add_option("--arg", args_kv, "operation argument key=value");
    check->add_option("--ctx-tag", ctx_tags, "extra context tag");

    std::string run_dir;
    std::string f_subject, f_object, f_operation, f_outcome;
    std::int64_t f_from = -1, f_to = -1;
    auto* inspect = app.add_subcommand("inspect", "filtered view of a run's behavior log");
    inspect->add_option("run_dir", run_dir)->required();
    inspect->add_option("--subject", f_subject);
    inspect->add_option("--object", f_object);
    inspect->add_option("--operation", f_operation);
    inspect->add_option("--outcome", f_outcome)->check(CLI::IsMember({"applied", "denied", "failed"}));
    inspect->add_option("--from-tick", f_from);
    inspect->add_option("--to-tick", f_to);

    int order = 2, top = 0;
    auto* predict = app.add_subcommand("predict", "ranked next actions for a subject");
    predict->add_option("run_dir", run_dir)->required();
    predict->add_option("--subject", subject)->required();
    predict->add_option("--n", order, "n-gram order")->check(CLI::PositiveNumber);
    predict->add_option("--top", top, "limit output rows");

    std::string baseline_dir;
    double theta = 0.05;
    auto* scan = app.add_subcommand("scan", "anomaly report for a run");
    scan->add_option("run_dir", run_dir)->required();
    scan->add_option("--baseline", baseline_dir, "baseline run for transition scoring");
    scan->add_option("--theta", theta, "rare-transition threshold");
    scan->add_option("--n", order, "n-gram order")->check(CLI::PositiveNumber);

    std::string what = "snapshot";
    auto* exp = app.add_subcommand("export", "re-emit a run artifact canonically");
    exp->add_option("run_dir", run_dir)->required();
    exp->add_option("--what", what, "snapshot|log|feed|decisions");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(scenario_path, flags, out_dir, format);
        if (check->parsed())
            return cmd_check(scenario_path, subject, operation, object, tick, args_kv, ctx_tags);
        if (inspect->parsed()) {
            bun::BehaviorFilter filter;
            if (!f_subject.empty()) filter.subject_id = f_subject;
            if (!f_object.empty()) filter.object_id = f_object;
            if (!f_operation.empty()) filter.operation = f_operation;
            if (!f_outcome.empty()) filter.outcome = bun::outcome_from(f_outcome);
            if (f_from >= 0) filter.from_time = f_from;
            if (f_to >= 0) filter.to_time = f_to;
            return cmd_inspect(run_dir, filter);
        }
        if (predict->parsed()) return cmd_predict(run_dir, subject, order, top);
        if (scan->parsed()) return cmd_scan(run_dir, baseline_dir, theta, order);
        if (exp->parsed()) return cmd_export(run_dir, what);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
