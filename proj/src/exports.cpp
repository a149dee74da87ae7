#include "bun/exports.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

namespace bun {

namespace {

std::string header_line(const char* format, const std::string& name, std::uint64_t seed) {
    return std::string(format) + " v1 run " + name + " seed " + std::to_string(seed);
}

RunHeader parse_header(const std::string& line, const char* expect_format,
                       const std::string& origin) {
    RunHeader h;
    h.format = expect_format;
    std::string prefix = std::string(expect_format) + " v1 run ";
    if (line.rfind(prefix, 0) != 0)
        throw Error(origin + ": expected a '" + expect_format + " v1' header");
    std::string rest = line.substr(prefix.size());
    auto sep = rest.find(" seed ");
    if (sep == std::string::npos) throw Error(origin + ": header is missing the seed");
    h.name = rest.substr(0, sep);
    try {
        h.seed = std::stoull(rest.substr(sep + 6));
    } catch (const std::exception&) {
        throw Error(origin + ": malformed seed in header");
    }
    return h;
}

}  // namespace

std::string export_behavior_log(const std::string& name, std::uint64_t seed,
                                const std::vector<BehaviorRecord>& log) {
    std::ostringstream out;
    out << header_line("bun-behaviors", name, seed) << "\n";
    for (const auto& rec : log) out << render_behavior_line(rec) << "\n";
    return out.str();
}

std::string export_event_feed(const std::string& name, std::uint64_t seed,
                              const std::vector<EventRecord>& feed) {
    std::ostringstream out;
    out << header_line("bun-events", name, seed) << "\n";
    for (const auto& ev : feed) out << render_event_line(ev) << "\n";
    return out.str();
}

std::string export_decisions(const std::string& name, std::uint64_t seed,
                             const std::vector<FiringDecision>& decisions) {
    std::ostringstream out;
    out << header_line("bun-decisions", name, seed) << "\n";
    for (const auto& d : decisions) out << render_decision_line(d) << "\n";
    return out.str();
}

std::string render_decision_line(const FiringDecision& d) {
    return std::to_string(d.seq) + " " + std::to_string(d.tick) + " " + d.trigger_id + " " +
           std::to_string(d.event_id) + " " + to_string(d.reason);
}

FiringDecision parse_decision_line(TokenStream& ts) {
    FiringDecision d;
    d.seq = ts.expect_int("decision seq");
    d.tick = ts.expect_int("tick");
    d.trigger_id = ts.expect_word("trigger id");
    d.event_id = ts.expect_int("event id");
    std::string reason = ts.expect_word("reason");
    auto r = fire_reason_from(reason);
    if (!r) ts.fail("unknown firing reason '" + reason + "'");
    d.reason = *r;
    d.fired = d.reason == FireReason::Fired;
    return d;
}

namespace {

template <typename T, typename ParseLine>
std::vector<T> parse_lines(std::string_view text, const char* format, RunHeader* header,
                           const std::string& origin, ParseLine parse_line) {
    auto lines = nonblank_lines(text);
    if (lines.empty()) throw Error(origin + ": empty artifact");
    RunHeader h = parse_header(lines.front().second, format, origin);
    if (header) *header = h;
    std::vector<T> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        TokenStream ts(lines[i].second, origin + ":" + std::to_string(lines[i].first));
        out.push_back(parse_line(ts));
        if (!ts.at_end()) ts.fail("trailing input");
    }
    return out;
}

}  // namespace

std::vector<BehaviorRecord> parse_behavior_log(std::string_view text, RunHeader* header,
                                               const std::string& origin) {
    return parse_lines<BehaviorRecord>(text, "bun-behaviors", header, origin,
                                       [](TokenStream& ts) { return parse_behavior_line(ts); });
}

std::vector<EventRecord> parse_event_feed(std::string_view text, RunHeader* header,
                                          const std::string& origin) {
    return parse_lines<EventRecord>(text, "bun-events", header, origin,
                                    [](TokenStream& ts) { return parse_event_line(ts); });
}

std::vector<FiringDecision> parse_decisions(std::string_view text, RunHeader* header,
                                            const std::string& origin) {
    return parse_lines<FiringDecision>(text, "bun-decisions", header, origin,
                                       [](TokenStream& ts) { return parse_decision_line(ts); });
}

RunPaths run_paths(const std::string& dir) {
    RunPaths p;
    p.behaviors = dir + "/behaviors.log";
    p.events = dir + "/events.log";
    p.decisions = dir + "/decisions.log";
    p.snapshot = dir + "/snapshot.bun";
    p.summary = dir + "/summary.txt";
    return p;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed: " + path);
}

RunArtifacts load_run_dir(const std::string& dir) {
    RunPaths paths = run_paths(dir);
    RunArtifacts art;
    RunHeader hb, he, hd;
    art.log = parse_behavior_log(read_file(paths.behaviors), &hb, paths.behaviors);
    art.feed = parse_event_feed(read_file(paths.events), &he, paths.events);
    art.decisions = parse_decisions(read_file(paths.decisions), &hd, paths.decisions);
    if (hb.name != he.name || hb.name != hd.name || hb.seed != he.seed || hb.seed != hd.seed)
        throw Error(dir + ": artifacts come from different runs");
    art.name = hb.name;
    art.seed = hb.seed;
    art.initial = BibStore::import_snapshot(read_file(paths.snapshot), paths.snapshot);
    return art;
}

RunPaths write_run_artifacts(const std::string& dir, const std::string& name, std::uint64_t seed,
                             const BibStore& initial, const RunResult& result) {
    std::filesystem::create_directories(dir);
    RunPaths paths = run_paths(dir);
    write_file(paths.behaviors, export_behavior_log(name, seed, result.log));
    write_file(paths.events, export_event_feed(name, seed, result.feed));
    write_file(paths.decisions, export_decisions(name, seed, result.decisions));
    write_file(paths.snapshot, initial.export_snapshot());
    return paths;
}

std::string render_run_summary(const std::string& name, const RunResult& result,
                               const BibStore& final_store) {
    std::ostringstream out;
    out << "run " << name << "\n";
    out << "final tick: " << result.final_tick << "\n";
    out << "quiescent: " << (result.quiescent ? "yes" : "no") << "\n";
    std::map<Outcome, std::int64_t> by_outcome;
    for (const auto& rec : result.log) ++by_outcome[rec.outcome];
    out << "behaviors: " << result.log.size() << " (applied " << by_outcome[Outcome::Applied]
        << ", denied " << by_outcome[Outcome::Denied] << ", failed " << by_outcome[Outcome::Failed]
        << ")\n";
    std::map<EventKind, std::int64_t> by_kind;
    for (const auto& ev : result.feed) ++by_kind[ev.kind];
    out << "events: " << result.feed.size() << " (object_changed "
        << by_kind[EventKind::ObjectChanged] << ", behavior_recorded "
        << by_kind[EventKind::BehaviorRecorded] << ", external_signal "
        << by_kind[EventKind::ExternalSignal] << ")\n";
    std::map<FireReason, std::int64_t> by_reason;
    for (const auto& d : result.decisions) ++by_reason[d.reason];
    out << "trigger decisions: " << result.decisions.size() << " (fired "
        << by_reason[FireReason::Fired] << ", condition_false "
        << by_reason[FireReason::ConditionFalse] << ", deduped " << by_reason[FireReason::Deduped]
        << ", depth_exceeded " << by_reason[FireReason::DepthExceeded] << ", budget_exhausted "
        << by_reason[FireReason::BudgetExhausted] << ")\n";
    out << "agents:\n";
    for (const auto& [id, c] : result.per_agent) {
        out << "  " << id << ": requests " << c.requests << ", applied " << c.applied
            << ", denied " << c.denied << ", failed " << c.failed << "\n";
    }
    out << "final object states:\n";
    for (const auto& [id, obj] : final_store.objects())
        out << "  " << id << " " << render_attr_map(obj.state) << "\n";
    return out.str();
}

}  // namespace bun
