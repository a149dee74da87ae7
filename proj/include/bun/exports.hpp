#pragma once

#include "bun/analyzer.hpp"

namespace bun {

// Canonical line-delimited run artifacts. Each file opens with a one-line
// header naming the format version, the scenario and the seed; bodies are
// byte-identical across runs with the same seed.
std::string export_behavior_log(const std::string& name, std::uint64_t seed,
                                const std::vector<BehaviorRecord>& log);
std::string export_event_feed(const std::string& name, std::uint64_t seed,
                              const std::vector<EventRecord>& feed);
std::string export_decisions(const std::string& name, std::uint64_t seed,
                             const std::vector<FiringDecision>& decisions);

std::string render_decision_line(const FiringDecision& d);
FiringDecision parse_decision_line(TokenStream& ts);

struct RunHeader {
    std::string format;  // "bun-behaviors" etc.
    std::string name;
    std::uint64_t seed = 0;
};

std::vector<BehaviorRecord> parse_behavior_log(std::string_view text, RunHeader* header = nullptr,
                                               const std::string& origin = "behaviors");
std::vector<EventRecord> parse_event_feed(std::string_view text, RunHeader* header = nullptr,
                                          const std::string& origin = "events");
std::vector<FiringDecision> parse_decisions(std::string_view text, RunHeader* header = nullptr,
                                            const std::string& origin = "decisions");

// A run directory holds behaviors.log, events.log, decisions.log and
// snapshot.bun (the pre-run store). Loading verifies the artifacts carry the
// same scenario name and seed.
struct RunArtifacts {
    std::string name;
    std::uint64_t seed = 0;
    std::vector<BehaviorRecord> log;
    std::vector<EventRecord> feed;
    std::vector<FiringDecision> decisions;
    BibStore initial;
};

RunArtifacts load_run_dir(const std::string& dir);

struct RunPaths {
    std::string behaviors, events, decisions, snapshot, summary;
};
RunPaths run_paths(const std::string& dir);

// Writes the four canonical artifacts; returns the paths used.
RunPaths write_run_artifacts(const std::string& dir, const std::string& name, std::uint64_t seed,
                             const BibStore& initial, const RunResult& result);

std::string render_run_summary(const std::string& name, const RunResult& result,
                               const BibStore& final_store);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace bun
